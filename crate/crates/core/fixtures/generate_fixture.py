#!/usr/bin/env python3
"""Writes the synthetic RF2-style release used by the tests and examples.

Deterministic: rerunning produces identical files. Uses the international
SNOMED CT type/refset/module identifiers so the default id mapping applies,
but every concept and description here is invented.

    python3 generate_fixture.py            # writes into ./ontology/
"""
import os

CORE = 900000000000207008
MODEL = 900000000000012004
FSN = 900000000000003001
SYN = 900000000000013009
POSS_EQUIV = 900000000000523009
REPLACED_BY = 900000000000526001
SAME_AS = 900000000000527005
MOVED_TO = 900000000000524003  # tracked by real releases, ignored by the tool

T0, T1, T2 = "20170731", "20180131", "20190131"

concepts = []      # (id, time, active, module)
descriptions = []  # (id, time, active, module, concept, type, term)
associations = []  # (id, time, active, module, refset, source, target)

_next_concept = [100000]
_next_desc = [500000]
_next_assoc = [900000]


def new_concept(fsn, synonyms=(), active=True, module=CORE, tag="disorder", history=False):
    cid = _next_concept[0]
    _next_concept[0] += 1
    if history:
        # an older row that the snapshot must supersede
        concepts.append((cid, T0, 0 if active else 1, module))
    concepts.append((cid, T2 if history or not active else T1, 1 if active else 0, module))
    add_desc(cid, f"{fsn} ({tag})", FSN, module=module)
    for s in synonyms:
        add_desc(cid, s, SYN, module=module)
    return cid


def add_desc(cid, term, kind, active=True, module=CORE, time=T1):
    did = _next_desc[0]
    _next_desc[0] += 1
    descriptions.append((did, time, 1 if active else 0, module, cid, kind, term))
    return did


def associate(refset, source, target, active=True, module=CORE):
    aid = _next_assoc[0]
    _next_assoc[0] += 1
    associations.append((aid, T2, 1 if active else 0, module, refset, source, target))


# metadata concepts in the model component module
for name in ["Fully specified name", "Entire term case sensitive", "Synonym",
             "Same as association reference set", "Core metadata concept"]:
    new_concept(name, [name.lower()] if name == "Synonym" else [name + " type"],
                module=MODEL, tag="core metadata concept")

SITES = ["ankle", "wrist", "knee", "elbow", "shoulder", "hip", "femur", "tibia",
         "fibula", "humerus", "radius", "sacrum", "clavicle", "patella", "pelvis", "spine"]

by_fsn = {}
for i, site in enumerate(SITES):
    S = site.capitalize()
    by_fsn[f"Sprain of {site}"] = new_concept(
        f"Sprain of {site}", [f"{S} sprain", f"Sprain of {site}"], history=(i % 4 == 0))
    by_fsn[f"Fracture of {site}"] = new_concept(
        f"Fracture of {site}", [f"{S} fracture", f"Broken {site}"] + ([f"Fractured {site}"] if i % 3 == 0 else []))
    by_fsn[f"Pain in {site}"] = new_concept(
        f"Pain in {site}", [f"{S} pain"] + ([f"{site} PAIN"] if i == 2 else []), tag="finding")
    by_fsn[f"Dislocation of {site}"] = new_concept(
        f"Dislocation of {site}", [f"{S} dislocation", f"Dislocated {site}"])

by_fsn["Sacrum sprain"] = new_concept("Sacrum sprain", ["Sacral sprain"])

ORGANS = ["liver", "kidney", "lung", "brain", "bladder", "pancreas", "stomach", "colon"]
for o in ORGANS:
    by_fsn[f"Tumor of {o}"] = new_concept(f"Tumor of {o}", [f"Tumour of {o}", f"{o.capitalize()} neoplasm"])
    by_fsn[f"Hemorrhage of {o}"] = new_concept(f"Hemorrhage of {o}", [f"Haemorrhage of {o}"])

HARD = [
    ("Malaria", ["Paludism", "Marsh fever"]),
    ("Myocardial infarction", ["Heart attack", "Cardiac infarction"]),
    ("Hypertensive disorder", ["High blood pressure", "Hypertension"]),
    ("Varicella", ["Chickenpox"]),
    ("Pertussis", ["Whooping cough"]),
    ("Rubella", ["German measles"]),
    ("Cerebrovascular accident", ["Stroke", "Cerebral infarction"]),
    ("Renal calculus", ["Kidney stone", "Nephrolithiasis"]),
    ("Epistaxis", ["Nosebleed"]),
    ("Pyrexia", ["Fever", "Febrile"]),
    ("Cephalalgia", ["Headache"]),
    ("Emesis", ["Vomiting"]),
    ("Dyspnea", ["Shortness of breath", "Dyspnoea", "Breathlessness"]),
    ("Syncope", ["Fainting"]),
    ("Pruritus", ["Itching"]),
    ("Alopecia", ["Hair loss"]),
    ("Otitis media", ["Middle ear infection"]),
    ("Cholelithiasis", ["Gallstone", "Gall stone"]),
    ("Hypoglycemia", ["Low blood sugar", "Hypoglycaemia"]),
    ("Diabetes mellitus", ["Sugar diabetes"]),
]
for fsn, syns in HARD:
    by_fsn[fsn] = new_concept(fsn, syns, tag="finding" if fsn in ("Pyrexia", "Emesis") else "disorder")

DIAGNOSTIC = ["Biopsy of liver", "Biopsy of kidney", "Magnetic resonance imaging of brain",
              "Computed tomography of chest", "Ultrasonography of abdomen", "Colonoscopy",
              "Bronchoscopy", "Electrocardiogram", "Lumbar puncture", "Blood culture"]
THERAPEUTIC = ["Appendectomy", "Excision of liver lesion", "Repair of hernia",
               "Replacement of hip joint", "Coronary artery bypass graft", "Chemotherapy",
               "Radiotherapy", "Insertion of stent", "Amputation of leg", "Kidney transplant"]
ORGANISMS = ["Staphylococcus aureus", "Escherichia coli", "Streptococcus pneumoniae",
             "Plasmodium falciparum", "Mycobacterium tuberculosis", "Candida albicans",
             "Influenza virus", "Herpes simplex virus", "Aspergillus fumigatus", "Salmonella enterica"]
for name in DIAGNOSTIC:
    new_concept(name, [f"{name} procedure"] if name.startswith("Biopsy") else [], tag="procedure")
for name in THERAPEUTIC:
    new_concept(name, [f"{name} operation"] if name.startswith("Repair") else [], tag="procedure")
for name in ORGANISMS:
    new_concept(name, [], tag="organism")

# concept with an FSN that changed over time and a synonym later inactivated
renamed = new_concept("Gastric ulcer", ["Stomach ulcer"])
descriptions[:] = [d for d in descriptions if not (d[4] == renamed and d[5] == FSN)]
old = add_desc(renamed, "Ulcer of stomach (disorder)", FSN, time=T0)
descriptions.append((old, T2, 0, CORE, renamed, FSN, "Ulcer of stomach (disorder)"))
add_desc(renamed, "Gastric ulcer (disorder)", FSN, time=T2)
retired = add_desc(renamed, "Peptic ulcer of stomach", SYN, time=T0)
descriptions.append((retired, T2, 0, CORE, renamed, SYN, "Peptic ulcer of stomach"))

# concept without any FSN (skipped with a warning)
orphan = _next_concept[0]
_next_concept[0] += 1
concepts.append((orphan, T1, 1, CORE))
add_desc(orphan, "Orphan synonym", SYN)


def deactivated(fsn, tag="disorder", marker=False):
    term = f"[D] {fsn}" if marker else fsn
    return new_concept(term, [], active=False, tag=tag)


# same-as: semantic duplicates
for site in SITES[:8]:
    src = deactivated(f"{site.capitalize()} sprain")
    associate(SAME_AS, src, by_fsn[f"Sprain of {site}"])
for site in SITES[8:12]:
    src = deactivated(f"Sprain of the {site}")
    associate(SAME_AS, src, by_fsn[f"Sprain of {site}"])
associate(SAME_AS, deactivated("Paludism"), by_fsn["Malaria"])
associate(SAME_AS, deactivated("Heart attack", marker=True), by_fsn["Myocardial infarction"])
associate(SAME_AS, deactivated("Tumour of liver"), by_fsn["Tumor of liver"])
associate(SAME_AS, deactivated("Kidney stone"), by_fsn["Renal calculus"])
associate(SAME_AS, deactivated("Stroke"), by_fsn["Cerebrovascular accident"])

# replaced-by: erroneous or obsolete concepts
for site in SITES[:10]:
    src = deactivated(f"Fracture of {site} NOS")
    associate(REPLACED_BY, src, by_fsn[f"Fracture of {site}"])
for site in SITES[10:14]:
    src = deactivated(f"Old injury of {site}")
    associate(REPLACED_BY, src, by_fsn[f"Dislocation of {site}"])
# normalizes to the target's own FSN, so no pair is produced
associate(REPLACED_BY, deactivated("Pain in ankle", tag="finding", marker=True), by_fsn["Pain in ankle"])
associate(REPLACED_BY, deactivated("Sugar diabetes"), by_fsn["Diabetes mellitus"])
associate(REPLACED_BY, deactivated("Whooping cough"), by_fsn["Pertussis"])

# possibly-equivalent-to: ambiguous concepts and their candidate meanings
sprain = deactivated("Sprain")
for site in SITES[:5]:
    associate(POSS_EQUIV, sprain, by_fsn[f"Sprain of {site}"])
limb = deactivated("Limb fracture")
for site in ["femur", "tibia", "fibula", "humerus"]:
    associate(POSS_EQUIV, limb, by_fsn[f"Fracture of {site}"])
for o in ORGANS[:6]:
    associate(POSS_EQUIV, deactivated(f"Tumors of {o}"), by_fsn[f"Tumor of {o}"])
joint = deactivated("Joint dislocation")
for site in SITES[:4]:
    associate(POSS_EQUIV, joint, by_fsn[f"Dislocation of {site}"])
associate(POSS_EQUIV, deactivated("Bleeding"), by_fsn["Hemorrhage of lung"])
associate(POSS_EQUIV, deactivated("Bleeding"), by_fsn["Hemorrhage of stomach"])

# rows the tool must ignore or drop
associate(MOVED_TO, deactivated("Moved elsewhere"), by_fsn["Malaria"])
associate(SAME_AS, by_fsn["Malaria"], by_fsn["Varicella"], active=False)
associate(SAME_AS, deactivated("Metadata duplicate"), 100000, module=MODEL)


def write(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\t".join(header) + "\n")
        for r in rows:
            f.write("\t".join(str(x) for x in r) + "\n")


here = os.path.join(os.path.dirname(os.path.abspath(__file__)), "ontology")
os.makedirs(here, exist_ok=True)
write(os.path.join(here, "concepts.tsv"),
      ["id", "effectiveTime", "active", "moduleId", "definitionStatusId"],
      [c + (900000000000074008,) for c in concepts])
write(os.path.join(here, "descriptions.tsv"),
      ["id", "effectiveTime", "active", "moduleId", "conceptId", "languageCode", "typeId", "term",
       "caseSignificanceId"],
      [(d[0], d[1], d[2], d[3], d[4], "en", d[5], d[6], 900000000000448009) for d in descriptions])
write(os.path.join(here, "associations.tsv"),
      ["id", "effectiveTime", "active", "moduleId", "refsetId", "referencedComponentId",
       "targetComponentId"],
      associations)

for name, rows in [("concepts", concepts), ("descriptions", descriptions), ("associations", associations)]:
    print(f"{name}: {len(rows)} rows")
print(f"distinct concepts: {len({c[0] for c in concepts})}")


# ---------------------------------------------------------------------------
# category lists, toy embeddings, a graded dataset and an annotation sample

import random
import re

root = os.path.dirname(os.path.abspath(__file__))


def tokens(term):
    return [t for t in re.split(r"[^0-9a-z]+", term.lower()) if t]


cat_dir = os.path.join(root, "categories")
os.makedirs(cat_dir, exist_ok=True)
for fname, terms in [("diagnostic_procedure.txt", DIAGNOSTIC),
                     ("therapeutic_procedure.txt", THERAPEUTIC),
                     ("organism.txt", ORGANISMS)]:
    with open(os.path.join(cat_dir, fname), "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(terms) + "\n")

all_terms = sorted({re.sub(r" \([^()]*\)$", "", d[6]).removeprefix("[D] ") for d in descriptions})
vocab = sorted({t for term in all_terms for t in tokens(term)})
topic_words = {
    0: {t for n in DIAGNOSTIC + THERAPEUTIC for t in tokens(n)},
    1: {t for n in ORGANISMS for t in tokens(n)},
    2: set(SITES) | set(ORGANS),
}


# words of a hard-synonym concept share a direction, so lexically distant
# synonyms still land close together
concept_words = [{t for n in [fsn] + syns for t in tokens(n)} for fsn, syns in HARD]


def embedding(rng, dim, words, topic_weight):
    topics = [[rng.gauss(0, 1) for _ in range(dim)] for _ in topic_words]
    concepts = [[rng.gauss(0, 1) for _ in range(dim)] for _ in concept_words]
    rows = []
    for w in words:
        v = [rng.gauss(0, 0.6) for _ in range(dim)]
        for k, members in topic_words.items():
            if w in members:
                v = [a + topic_weight * b for a, b in zip(v, topics[k])]
        for members, direction in zip(concept_words, concepts):
            if w in members:
                v = [a + topic_weight * b for a, b in zip(v, direction)]
        rows.append((w, v))
    return rows


emb_dir = os.path.join(root, "embeddings")
os.makedirs(emb_dir, exist_ok=True)
rng = random.Random(20201)
rows_a = embedding(rng, 16, vocab, 1.5)
with open(os.path.join(emb_dir, "toy_a.txt"), "w", encoding="utf-8", newline="\n") as f:
    f.write(f"{len(rows_a)} 16\n")
    for w, v in rows_a:
        f.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")

MISSING_B = {"paludism", "nephrolithiasis", "fumigatus", "haemorrhage", "cephalalgia", "sacral"}
rows_b = embedding(rng, 12, [w for w in vocab if w not in MISSING_B], 0.8)
with open(os.path.join(emb_dir, "toy_b.txt"), "w", encoding="utf-8", newline="\n") as f:
    for w, v in rows_b:  # no header line
        f.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")

vec_a = dict(rows_a)
with open(os.path.join(emb_dir, "toy_terms.tsv"), "w", encoding="utf-8", newline="\n") as f:
    seen = set()
    for term in all_terms:
        if term.lower() in seen:
            continue
        seen.add(term.lower())
        toks = tokens(term)
        mean = [sum(vec_a[t][d] for t in toks) / len(toks) for d in range(8)]
        v = [m + rng.gauss(0, 0.05) for m in mean]
        f.write(term + "\t" + " ".join(f"{x:.6f}" for x in v) + "\n")

graded = [
    ("Malaria", "Paludism", 4.0), ("Heart attack", "Myocardial infarction", 4.0),
    ("Fever", "Pyrexia", 3.8), ("Kidney stone", "Renal calculus", 3.9),
    ("Ankle sprain", "Sprain of ankle", 4.0), ("Wrist fracture", "Broken wrist", 3.7),
    ("Headache", "Cephalalgia", 3.6), ("Vomiting", "Emesis", 3.8),
    ("Tumor of liver", "Liver neoplasm", 3.5), ("Stroke", "Cerebral infarction", 3.2),
    ("Knee pain", "Pain in hip", 1.8), ("Fracture of femur", "Fracture of tibia", 1.9),
    ("Tumor of lung", "Hemorrhage of lung", 1.5), ("Hair loss", "Itching", 0.8),
    ("Colonoscopy", "Bronchoscopy", 1.6), ("Appendectomy", "Repair of hernia", 1.4),
    ("Malaria", "Plasmodium falciparum", 2.4), ("Influenza virus", "Fever", 1.2),
    ("Chickenpox", "German measles", 1.7), ("Whooping cough", "Nosebleed", 0.6),
    ("Escherichia coli", "Salmonella enterica", 1.9), ("Chemotherapy", "Radiotherapy", 2.2),
    ("Elbow dislocation", "Shoulder dislocation", 2.0), ("Gallstone", "Kidney stone", 1.3),
    ("Syncope", "Fainting", 3.9), ("Hypertension", "Low blood sugar", 0.4),
    ("Candida albicans", "Ankle sprain", 0.0), ("Lumbar puncture", "Hip pain", 0.3),
    ("Broken femur", "Fracture of femur", 4.0), ("Sacral sprain", "Sacrum sprain", 3.8),
]
with open(os.path.join(root, "graded.csv"), "w", encoding="utf-8", newline="\n") as f:
    f.write("term_a,term_b,score\n")
    for a, b, s in graded:
        f.write(f"{a},{b},{s}\n")

# 20 annotated pairs, three annotators; label is the generated dataset label
votes = ["same", "not-same", "dont-know"]
ann_rng = random.Random(7)
with open(os.path.join(root, "annotations.csv"), "w", encoding="utf-8", newline="\n") as f, \
        open(os.path.join(root, "annotation_labels.csv"), "w", encoding="utf-8", newline="\n") as g:
    f.write("item_id,annotator,verdict\n")
    g.write("item_id,label\n")
    for item in range(1, 21):
        label = 1 if item <= 10 else 0
        g.write(f"{item},{label}\n")
        for ann in ("ann1", "ann2", "ann3"):
            r = ann_rng.random()
            agree = votes[0] if label else votes[1]
            other = votes[1] if label else votes[0]
            f.write(f"{item},{ann},{agree if r < 0.8 else ('dont-know' if r < 0.9 else other)}\n")

print(f"vocabulary: {len(vocab)} tokens, terms: {len(all_terms)}")

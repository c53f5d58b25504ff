pub mod categorysep;
pub mod cli;
pub mod datasetgen;
pub mod embeddings;
pub mod evaluation;
pub mod ontology;
pub mod simmetrics;
pub mod strings;

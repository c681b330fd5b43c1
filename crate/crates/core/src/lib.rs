pub mod analysis;
pub mod atomset;
pub mod bayes;
pub mod dist;
pub mod ground;
pub mod intervene;
pub mod logic3;
pub mod lpad;
pub mod prob;
pub mod process;
pub mod syntax;
pub mod wfs;

pub mod environment;
pub mod frames;
pub mod path_guidance;
pub mod plant;
pub mod tether;
pub mod hjsolver;
pub mod hybrid_control;
pub mod sim;

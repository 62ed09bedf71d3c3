pub mod dynamics;
pub mod error;
pub mod estimates;
pub mod initial_data;
pub mod littlewood_paley;
pub mod spectral;

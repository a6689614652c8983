pub mod allocate;
pub mod bench;
pub mod compose;
pub mod experiment;
pub mod verify;

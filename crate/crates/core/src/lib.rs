pub mod chat;
pub mod engine;
pub mod extract;
pub mod metrics;
pub mod orchestrator;
pub mod pipeline;
pub mod prompts;
pub mod report;

//! Pan/tilt centering, gesture-to-device command mapping, and the ASCII
//! line protocol spoken to the motor/IR microcontroller.

mod control;
mod mapping;
mod transport;
mod wire;

pub use control::{centering_step, Axis, ControllerConfig, MotorCommand};
pub use mapping::{map_gesture, CommandMapping, DeviceCommand, MappingEntry};
pub use transport::{open_transport, TransportUri, TransportWorker, WireWriter};
pub use wire::{decode_stream, decode_wire, encode_wire, Command, MAX_WIRE_STEPS};

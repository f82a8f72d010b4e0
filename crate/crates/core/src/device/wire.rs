//! Line protocol, ASCII, one command per LF-terminated line:
//!
//! ```text
//! motor  = "M" SP ("X" / "Y") SP ("+" / "-") 1*3DIGIT LF   ; no leading zeros
//! device = "D" SP token SP token LF                       ; token = [A-Za-z0-9_]{1,16}
//! ```

use std::fmt;

use super::control::{Axis, MotorCommand};
use super::mapping::DeviceCommand;
use crate::error::{Error, Result};

/// Largest magnitude three digits can carry.
pub const MAX_WIRE_STEPS: u32 = 999;

pub(crate) const MAX_TOKEN_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Command {
    Motor(MotorCommand),
    Device(DeviceCommand),
}

impl From<MotorCommand> for Command {
    fn from(c: MotorCommand) -> Self {
        Command::Motor(c)
    }
}

impl From<DeviceCommand> for Command {
    fn from(c: DeviceCommand) -> Self {
        Command::Device(c)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Motor(m) => {
                let sign = if m.steps() < 0 { '-' } else { '+' };
                write!(f, "M {} {sign}{}", m.axis(), m.steps().unsigned_abs())
            }
            Command::Device(d) => write!(f, "D {} {}", d.device_id(), d.action()),
        }
    }
}

pub fn encode_wire(cmd: &Command) -> Vec<u8> {
    let mut line = cmd.to_string().into_bytes();
    line.push(b'\n');
    line
}

pub(crate) fn is_token_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, want: u8, what: &str) -> Result<()> {
        match self.peek() {
            Some(b) if b == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::protocol(self.pos, format!("expected {what}"))),
        }
    }

    fn token(&mut self, what: &str) -> Result<&'a str> {
        let start = self.pos;
        while self.peek().is_some_and(is_token_byte) {
            self.pos += 1;
            if self.pos - start > MAX_TOKEN_LEN {
                return Err(Error::protocol(start, format!("{what} longer than {MAX_TOKEN_LEN} bytes")));
            }
        }
        if self.pos == start {
            return Err(Error::protocol(start, format!("expected {what}")));
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos]).expect("token bytes are ASCII"))
    }

    fn finish(&mut self) -> Result<()> {
        self.expect(b'\n', "LF")?;
        if self.pos != self.bytes.len() {
            return Err(Error::protocol(self.pos, "trailing bytes after LF"));
        }
        Ok(())
    }
}

/// Decodes exactly one line (including its LF). Anything outside the
/// grammar, or a motor magnitude above `max_steps`, is a protocol error
/// carrying the offending byte offset.
pub fn decode_wire(bytes: &[u8], max_steps: u32) -> Result<Command> {
    let mut cur = Cursor { bytes, pos: 0 };
    let verb = cur.peek();
    match verb {
        Some(b'M') | Some(b'D') => cur.pos += 1,
        _ => return Err(Error::protocol(0, "unknown verb")),
    }
    cur.expect(b' ', "space after verb")?;

    if verb == Some(b'D') {
        let device = cur.token("device id")?;
        cur.expect(b' ', "space after device id")?;
        let action = cur.token("action")?;
        cur.finish()?;
        let cmd = DeviceCommand::new(device, action)
            .map_err(|e| Error::protocol(2, e.to_string()))?;
        return Ok(Command::Device(cmd));
    }

    let axis = match cur.peek() {
        Some(b'X') => Axis::X,
        Some(b'Y') => Axis::Y,
        _ => return Err(Error::protocol(cur.pos, "axis must be X or Y")),
    };
    cur.pos += 1;
    cur.expect(b' ', "space after axis")?;
    let negative = match cur.peek() {
        Some(b'+') => false,
        Some(b'-') => true,
        _ => return Err(Error::protocol(cur.pos, "sign must be + or -")),
    };
    cur.pos += 1;
    let digits_at = cur.pos;
    let mut value: u32 = 0;
    while let Some(b) = cur.peek().filter(u8::is_ascii_digit) {
        if cur.pos - digits_at == 3 {
            return Err(Error::protocol(cur.pos, "more than 3 digits"));
        }
        if cur.pos == digits_at && b == b'0' {
            return Err(Error::protocol(cur.pos, "zero or leading zero in step count"));
        }
        value = value * 10 + u32::from(b - b'0');
        cur.pos += 1;
    }
    if cur.pos == digits_at {
        return Err(Error::protocol(cur.pos, "expected digits"));
    }
    cur.finish()?;
    if value > max_steps {
        return Err(Error::protocol(digits_at, format!("{value} exceeds max steps {max_steps}")));
    }
    let steps = if negative { -(value as i32) } else { value as i32 };
    MotorCommand::new(axis, steps)
        .map(Command::Motor)
        .map_err(|e| Error::protocol(digits_at, e.to_string()))
}

/// Decodes a buffer of back-to-back lines. Error offsets are relative to
/// the whole buffer.
pub fn decode_stream(bytes: &[u8], max_steps: u32) -> Result<Vec<Command>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < bytes.len() {
        let end = bytes[start..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| start + i + 1)
            .unwrap_or(bytes.len());
        let cmd = decode_wire(&bytes[start..end], max_steps).map_err(|e| match e {
            Error::Protocol { offset, message } => Error::protocol(start + offset, message),
            other => other,
        })?;
        out.push(cmd);
        start = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn motor(axis: Axis, steps: i32) -> Command {
        Command::Motor(MotorCommand::new(axis, steps).unwrap())
    }

    #[test]
    fn encodings() {
        assert_eq!(encode_wire(&motor(Axis::X, 8)), b"M X +8\n");
        assert_eq!(encode_wire(&motor(Axis::Y, -120)), b"M Y -120\n");
        let d = Command::Device(DeviceCommand::new("tv", "POWER").unwrap());
        assert_eq!(encode_wire(&d), b"D tv POWER\n");
    }

    #[test]
    fn decodes_valid_lines() {
        assert_eq!(decode_wire(b"M X +8\n", 20).unwrap(), motor(Axis::X, 8));
        assert_eq!(decode_wire(b"M Y -20\n", 20).unwrap(), motor(Axis::Y, -20));
        assert_eq!(
            decode_wire(b"D living_room_tv VOL_UP\n", 20).unwrap(),
            Command::Device(DeviceCommand::new("living_room_tv", "VOL_UP").unwrap())
        );
    }

    fn offset_of(line: &[u8]) -> usize {
        match decode_wire(line, 20) {
            Err(Error::Protocol { offset, .. }) => offset,
            other => panic!("{:?} decoded to {other:?}", String::from_utf8_lossy(line)),
        }
    }

    #[test]
    fn rejects_deviations() {
        assert_eq!(offset_of(b"M Z +8\n"), 2);
        assert_eq!(offset_of(b"Q X +8\n"), 0);
        assert_eq!(offset_of(b"M X 8\n"), 4);
        assert_eq!(offset_of(b"M X +08\n"), 5);
        assert_eq!(offset_of(b"M X +0\n"), 5);
        assert_eq!(offset_of(b"M X +1000\n"), 8);
        assert_eq!(offset_of(b"M X +21\n"), 5);
        assert_eq!(offset_of(b"M X +8"), 6);
        assert_eq!(offset_of(b"M X +8\n\n"), 7);
        assert_eq!(offset_of(b"M X +8\r\n"), 6);
        assert_eq!(offset_of(b"M  X +8\n"), 2);
        assert_eq!(offset_of(b"D tv\n"), 4);
        assert_eq!(offset_of(b"D tv POW-ER\n"), 8);
        assert_eq!(offset_of(b"D abcdefghijklmnopq POWER\n"), 2);
        assert_eq!(offset_of(b""), 0);
    }

    #[test]
    fn stream_offsets_are_global() {
        let buf = b"M X +8\nD tv POWER\nM Q +1\n";
        match decode_stream(buf, 20) {
            Err(Error::Protocol { offset, .. }) => assert_eq!(offset, 20),
            other => panic!("{other:?}"),
        }
        assert_eq!(decode_stream(&buf[..18], 20).unwrap().len(), 2);
    }
}

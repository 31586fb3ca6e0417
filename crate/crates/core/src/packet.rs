//! The unit that traverses the network.

use crate::time::SimTime;

pub type FlowId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum PacketKind {
    Data,
    Ack,
    Nack,
    /// Payload-stripped data packet produced by a trimming switch.
    TrimmedHeader,
}

impl PacketKind {
    pub fn is_control(self) -> bool {
        !matches!(self, PacketKind::Data)
    }
}

pub mod flags {
    /// Congestion experienced, set by a switch.
    pub const ECN: u8 = 1;
    /// ACK echoes a CE mark seen on the data packet.
    pub const ECN_ECHO: u8 = 1 << 1;
    pub const RETRANSMIT: u8 = 1 << 2;
    /// Receiver has completed the (sub)flow.
    pub const COMPLETE: u8 = 1 << 3;
    /// Trimmed header travelling back to its sender.
    pub const TO_SENDER: u8 = 1 << 4;
}

/// Field meaning by kind:
/// - `Data`: `seq` is the packet (or symbol) index within the subflow.
/// - `Ack`: `seq` is the cumulative ack (next expected) or, for coding, the
///   count of distinct symbols; `aux` is the seq that triggered the ACK.
/// - `Nack`: `seq` is the missing packet.
/// - `TrimmedHeader`: `seq` is the trimmed data packet's seq.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub flow: FlowId,
    pub seq: u32,
    pub aux: u32,
    pub label: u32,
    pub size: u32,
    /// Host this packet is being routed to.
    pub to: u32,
    pub subflow: u16,
    pub kind: PacketKind,
    pub flags: u8,
    pub sent_at: SimTime,
}

impl Packet {
    pub fn has(&self, flag: u8) -> bool {
        self.flags & flag != 0
    }

    pub fn set(&mut self, flag: u8) {
        self.flags |= flag;
    }

    /// Header-only copy, as emitted by a trimming switch.
    pub fn trimmed(&self, header_bytes: u32) -> Packet {
        Packet {
            kind: PacketKind::TrimmedHeader,
            size: header_bytes,
            flags: self.flags & flags::RETRANSMIT,
            ..*self
        }
    }
}

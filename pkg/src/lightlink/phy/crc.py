"""Frame check sequence: IEEE CRC-32 (reflected, init and final-xor all ones)."""

from __future__ import annotations

import binascii
import struct


def fcs_crc32(data: bytes) -> int:
    return binascii.crc32(data) & 0xFFFFFFFF


def append_fcs(psdu: bytes) -> bytes:
    return psdu + struct.pack("<I", fcs_crc32(psdu))


def split_and_check_fcs(frame: bytes) -> tuple[bytes, bool]:
    """Split a frame into (payload, fcs_ok)."""
    if len(frame) < 4:
        return frame, False
    payload, fcs = frame[:-4], frame[-4:]
    return payload, struct.pack("<I", fcs_crc32(payload)) == fcs

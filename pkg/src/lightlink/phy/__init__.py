"""802.11n SISO baseband modem: PSDU in, complex baseband out, and back."""

from lightlink.phy.transmitter import generate_ppdu
from lightlink.phy.receiver import receive_ppdu, RxStats, SyncError
from lightlink.phy.crc import fcs_crc32

__all__ = ["generate_ppdu", "receive_ppdu", "RxStats", "SyncError", "fcs_crc32"]

"""lightlink: link-level simulator for an 802.11n SISO modem carried over an
attenuator/mixer/LED/photodiode analog chain."""

__version__ = "0.1.0"

"""Forward-error-correction workbench for the BPSK + AWGN + 1-bit ADC channel."""

__version__ = "0.1.0"

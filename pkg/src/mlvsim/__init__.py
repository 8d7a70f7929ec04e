"""Discrete-event simulator and policy library for ML model version
lifecycle management on a multi-layer O-RAN-style edge."""

from .kernels import BACKEND as KERNEL_BACKEND

__all__ = ["KERNEL_BACKEND"]
__version__ = "0.1.0"

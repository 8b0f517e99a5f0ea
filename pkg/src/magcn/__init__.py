"""MAGCN: multi-channel attentive graph convolutional network for multimodal
sentiment analysis, implemented on a minimal reverse-mode autodiff core.
"""

from . import kernels

__version__ = "0.1.0"

__all__ = ["kernels", "__version__"]

"""Reference-free phase aberration correction for single plane-wave ultrasound.

Desk-scale pipeline: random phase-screen profiles, full-synthetic-aperture
simulation, aberrated plane-wave synthesis, DAS beamforming, B-mode and
network-domain transforms, self-supervised training with an adaptive mixed
loss, and ROI image-quality metrics.
"""

__version__ = "0.1.0"

"""Video face de-identification toolkit: synthetic avatar world, masked
inpainting pipeline, re-enactment, and embedding-distance metrics."""

from dtwin._core import (
    DtwinError,
    build_mask,
    decode_latents,
    embedding_distance,
    evaluate,
    l2_normalize,
    render_frame,
    run,
    synth_dataset,
)

__all__ = [
    "DtwinError",
    "build_mask",
    "decode_latents",
    "embedding_distance",
    "evaluate",
    "l2_normalize",
    "render_frame",
    "run",
    "synth_dataset",
]

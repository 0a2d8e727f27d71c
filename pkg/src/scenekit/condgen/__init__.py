"""Conditional generation: latent init, the denoising loop contract, and
conditioning-bundle export."""

from scenekit.condgen.latent import InvalidDims, init_latent  # noqa: F401
from scenekit.condgen.diffusion import (  # noqa: F401
    BackendError,
    DenoiserBackend,
    MockDenoiser,
    run_diffusion,
)
from scenekit.condgen.bundle import (  # noqa: F401
    BundleError,
    BundleFrame,
    InconsistentDims,
    export_bundle,
    verify_bundle,
)

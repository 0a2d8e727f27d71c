"""scenekit: scenario scripts to simulated collisions to diffusion conditioning bundles."""

__version__ = "0.1.0"

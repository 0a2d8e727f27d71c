"""Release gate: ten end-to-end checks with pinned tolerances.

Each check prints a single pass/fail line (bypassing capture, so it shows in
plain pytest output) and enforces its own wall-clock budget.  Tolerances are
written out literally here on purpose; loosening one is a contract change,
not a test fix.
"""

import functools
import json
import math
import random
import time
from pathlib import Path

import numpy as np

import conftest
from scenekit.cli import main
from scenekit.condgen.diffusion import MockDenoiser, run_diffusion
from scenekit.condgen.latent import init_latent
from scenekit.dsl import compile_script
from scenekit.dsl.parser import parse
from scenekit.dsl.sampler import sample_parameters, sample_variations
from scenekit.dsl.tokens import tokenize
from scenekit.promptgen.stubserver import StubLLMServer
from scenekit.promptgen.template import DEFAULT_TEMPLATE, ScenarioType, assemble_prompt
from scenekit.render.combine import PRESETS, combine_controls, normalize_modality
from scenekit.sim.classify import CollisionClass
from scenekit.sim.engine import SimConfig, run
from scenekit.sim.geometry import Box, obbs_overlap, points_in_box, signed_separation
from scenekit.sim.worldmap import builtin_map

DATA = Path(__file__).parent / "data"
FIXTURES = DATA / "fixtures"


def criterion(number, slug, budget_s):
    """Register the verdict label and enforce the wall-clock budget."""

    def decorate(fn):
        conftest.acceptance_labels[fn.__name__] = f"[acceptance {number:02d}] {slug}"

        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            fn(*args, **kwargs)
            elapsed = time.perf_counter() - start
            if elapsed >= budget_s:
                raise AssertionError(f"finished in {elapsed:.2f}s, budget is {budget_s:.0f}s")

        return wrapper

    return decorate


# -----------------------------------------------------------------------
# 1. prompt assembly reproduces the frozen template text byte for byte

EXAMPLE_CRUISE = """behavior Cruise(v):
    follow lane at v

ego = new Car on lane main_a at 10.0 with speed 12.0 with behavior Cruise(12.0)

terminate when time above 8.0
"""

EXAMPLE_DASH = """behavior Dash(v):
    cross forward at v when distance to ego below 9.0

ego = new Car on lane main_a at 5.0 with speed 10.0
walker = new Pedestrian at (30.0, -3.0) facing 90.0 with behavior Dash(2.0)

require collision
terminate when time above 10.0
"""


@criterion(1, "prompt-template-golden-bytes", budget_s=1.0)
def test_01_template_fidelity():
    expected = (DATA / "golden_prompt.txt").read_text()
    got = assemble_prompt(
        DEFAULT_TEMPLATE, ScenarioType.VEHICLE_CUT_IN, [EXAMPLE_CRUISE, EXAMPLE_DASH]
    )
    assert got == expected


# -----------------------------------------------------------------------
# 2. twenty sampled variations are pairwise distinct

VARIATION_SCRIPT = """param gap = Range(25.0, 40.0)

behavior Cruise(v):
    follow lane at v

behavior HardBrake(rate):
    brake at rate when time above 1.0

ego = new Car on lane main_a at 20.0 with speed 14.0 with behavior Cruise(14.0)
lead = new Car ahead of ego by gap with speed 8.0 with behavior HardBrake(4.5)

require collision of rear-end
terminate when time above 15.0
"""


@criterion(2, "twenty-distinct-variations", budget_s=5.0)
def test_02_variation_distinctness():
    ast, diags = compile_script(VARIATION_SCRIPT)
    assert ast is not None and diags == []
    variations = sample_variations(ast, n=20, base_seed=0)
    assert len(variations) == 20
    keys = [v.resolved_key() for v in variations]
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            assert keys[i] != keys[j], f"variations {i} and {j} resolved identically"


# -----------------------------------------------------------------------
# 3. the collision taxonomy sorts the three staged crashes correctly

@criterion(3, "collision-taxonomy-three-fixtures", budget_s=10.0)
def test_03_collision_taxonomy():
    expected = {
        "rear_end": ("straight", CollisionClass.REAR_END),
        "t_bone": ("crossing", CollisionClass.T_BONE),
        "cyclist": ("crossing", CollisionClass.VEHICLE_CYCLIST),
    }
    traces = {}
    for name, (map_name, klass) in expected.items():
        ast, diags = compile_script((FIXTURES / f"{name}.scn").read_text())
        assert ast is not None and diags == []
        trace = run(sample_parameters(ast, 0), builtin_map(map_name), SimConfig())
        assert trace.termination == "collision", name
        assert trace.events[0].classification is klass, name
        traces[name] = trace

    # Rear-end fixture kinematics: the lead brakes from 8 m/s at 4 m/s^2
    # (stopping after 8 m at t=2 s); ego closes at a constant 15 m/s on a
    # 30 m centre gap, so cars touch when 30 + 8 - 15 t equals one 4.5 m
    # car length.  Prediction must land after the lead has stopped.
    predicted = (30.0 + 8.0**2 / (2.0 * 4.0) - 4.5) / 15.0
    assert predicted > 8.0 / 4.0
    dt = traces["rear_end"].dt
    assert dt == 0.05
    assert abs(traces["rear_end"].events[0].time - predicted) <= dt + 1e-9


# -----------------------------------------------------------------------
# 4. weighted combination matches an elementwise pure-python oracle

@criterion(4, "weighted-sum-oracle", budget_s=5.0)
def test_04_combine_matches_oracle():
    rng = np.random.default_rng(11)
    shape = (96, 128)
    far = 100.0
    seg = rng.integers(0, 6, size=shape).astype(np.uint8)
    depth = (rng.random(shape, dtype=np.float32) * 120.0).astype(np.float32)
    edge = rng.integers(0, 2, size=shape).astype(np.uint8)
    normalized = {
        "seg": normalize_modality(seg, "seg"),
        "depth": normalize_modality(depth, "depth", far_plane=far),
        "edge": normalize_modality(edge, "edge"),
    }
    pick = random.Random(12)
    pixels = [(pick.randrange(shape[0]), pick.randrange(shape[1])) for _ in range(1000)]
    for preset, weights in PRESETS.items():
        combined = combine_controls(normalized, weights)
        for i, j in pixels:
            acc = 0.0
            acc += weights.get("seg", 0.0) * (int(seg[i, j]) / 5.0)
            acc += weights.get("depth", 0.0) * (1.0 - min(float(depth[i, j]) / far, 1.0))
            acc += weights.get("edge", 0.0) * float(edge[i, j])
            assert abs(float(combined[i, j]) - acc) <= 1e-6, (preset, i, j)


# -----------------------------------------------------------------------
# 5. the denoising loop calls the backend once per step, countdown order,
#    and the deterministic backend converges onto the scaled control map

class _SpyBackend:
    def __init__(self):
        self.steps = []
        self.inner = MockDenoiser(prompt_sensitivity=False)

    def denoise(self, z, control, t, prompt, strength):
        self.steps.append(t)
        return self.inner.denoise(z, control, t, prompt, strength)


@criterion(5, "denoise-countdown-and-convergence", budget_s=5.0)
def test_05_denoise_loop_contract():
    control = np.random.default_rng(5).random((64, 64), dtype=np.float32)
    spy = _SpyBackend()
    out = run_diffusion(spy, control, "sunny day", steps=50, strength=0.8, seed=3)
    assert spy.steps == list(range(50, 0, -1))
    assert len(spy.steps) == 50
    gap = float(np.max(np.abs(out - 0.8 * control)))
    assert gap <= 0.01
    # prompt perturbation stays inside the same tolerance
    out2 = run_diffusion(MockDenoiser(), control, "sunny day", steps=50, strength=0.8, seed=3)
    assert float(np.max(np.abs(out2 - 0.8 * control))) <= 0.01


# -----------------------------------------------------------------------
# 6. separating-axis verdicts agree with 1 cm point sampling

@criterion(6, "obb-overlap-vs-point-sampling", budget_s=30.0)
def test_06_sat_against_sampling_oracle():
    def grid(box, step=0.01):
        nx = max(2, math.ceil(box.length / step) + 1)
        ny = max(2, math.ceil(box.width / step) + 1)
        xs = np.linspace(-box.length / 2.0, box.length / 2.0, nx)
        ys = np.linspace(-box.width / 2.0, box.width / 2.0, ny)
        gx, gy = np.meshgrid(xs, ys)
        local = np.column_stack([gx.ravel(), gy.ravel()])
        c, s = math.cos(box.heading), math.sin(box.heading)
        return local @ np.array([[c, s], [-s, c]]) + np.array([box.x, box.y])

    def sampled(a, b):
        return bool(points_in_box(grid(a), b).any() or points_in_box(grid(b), a).any())

    rng = random.Random(20240817)

    def rand_box():
        return Box(
            rng.uniform(-3, 3),
            rng.uniform(-3, 3),
            rng.uniform(0, 2 * math.pi),
            rng.uniform(0.5, 5.0),
            rng.uniform(0.3, 2.5),
        )

    compared = overlapping = 0
    for _ in range(1000):
        a, b = rand_box(), rand_box()
        if abs(signed_separation(a, b)) <= 0.02:  # tangency band: undecidable at 1 cm
            continue
        compared += 1
        verdict = obbs_overlap(a, b)
        overlapping += verdict
        assert verdict == sampled(a, b), (a, b)
    assert compared >= 900
    assert 100 <= overlapping <= compared - 100  # both outcomes well represented


# -----------------------------------------------------------------------
# 7. one seed, one output: everything on disk is byte-identical across runs

def _pipeline(tmp, out, camera, seed="9"):
    script = tmp / "scenario.scn"
    if not script.exists():
        script.write_text(VARIATION_SCRIPT)
    code = main(
        [
            "pipeline",
            "--script",
            str(script),
            "--map",
            "straight",
            "--camera",
            str(camera),
            "--steps",
            "4",
            "--max-duration",
            "5",
            "-n",
            "2",
            "--seed",
            seed,
            "-o",
            str(out),
        ]
    )
    assert code == 0


def _write_camera(tmp):
    camera = tmp / "camera.json"
    camera.write_text(
        json.dumps(
            {
                "variant": "topdown",
                "center": [40.0, 0.0],
                "meters_per_pixel": 1.0,
                "width": 32,
                "height": 32,
            }
        )
    )
    return camera


@criterion(7, "byte-identical-reruns", budget_s=60.0)
def test_07_determinism(tmp_path):
    camera = _write_camera(tmp_path)
    _pipeline(tmp_path, tmp_path / "a", camera)
    _pipeline(tmp_path, tmp_path / "b", camera)
    a, b = tmp_path / "a", tmp_path / "b"
    for rel in (
        "summary.json",
        "var-000/trace.json",
        "var-000/manifest.json",
        "var-001/manifest.json",
        "var-000/frames/000000/seg.pgm",
        "var-000/frames/000010/combined.pfm",
        "var-000/frames/000010/latent_final.pfm",
    ):
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


# -----------------------------------------------------------------------
# 8. the whole pipeline self-heals against a scripted flaky generator

BROKEN_SCRIPT = "```\nego = new Car at (0.0, 0.0) with speed Range(9.0, 2.0)\n```"


@criterion(8, "stub-generator-repair-round", budget_s=60.0)
def test_08_hermetic_pipeline(tmp_path):
    camera = _write_camera(tmp_path)
    out = tmp_path / "out"
    with StubLLMServer([BROKEN_SCRIPT, "```\n" + VARIATION_SCRIPT + "```"]) as stub:
        code = main(
            [
                "pipeline",
                "--base-url",
                stub.base_url,
                "--model",
                "stub",
                "--type",
                "rear-end-collision",
                "--map",
                "straight",
                "--camera",
                str(camera),
                "--steps",
                "4",
                "--max-duration",
                "5",
                "-n",
                "2",
                "-o",
                str(out),
            ]
        )
    assert code == 0
    transcript = json.loads((out / "transcript.json").read_text())
    assert len(transcript["rounds"]) == 2
    assert transcript["outcome"] == "success"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passing"] >= 1
    passing = [row for row in summary["variations"] if row["passed"]]
    assert (out / passing[0]["bundle"] / "manifest.json").is_file()


# -----------------------------------------------------------------------
# 9. hostile input never crashes the frontend and spans stay in bounds

_FUZZ_VOCAB = [
    "ego", "new", "Car", "Truck", "behavior", "param", "Range", "Choice", "(", ")",
    "=", ",", ":", "at", "on", "lane", "with", "speed", "require", "collision",
    "terminate", "when", "time", "above", "below", "distance", "from", "to", "of",
    "by", "ahead", "behind", "facing", "cross", "brake", "follow", "1.5", "-3",
    "0xff", "\n", "\n    ", "  ", "#", "\t", '"', "'", "…", "Ω", "³", "-³", "٣",
]


@criterion(9, "frontend-fuzz-ten-thousand", budget_s=60.0)
def test_09_parser_fuzz():
    rng = random.Random(99)
    for i in range(10_000):
        if i % 2 == 0:
            text = rng.randbytes(rng.randrange(0, 160)).decode("latin-1")
        else:
            text = "".join(rng.choice(_FUZZ_VOCAB) for _ in range(rng.randrange(0, 60)))
        lines = text.split("\n")
        tokens, diags = tokenize(text)  # must not raise
        ast, parse_diags = parse(tokens)  # must not raise
        for d in list(diags) + list(parse_diags):
            s = d.span
            assert 1 <= s.line <= len(lines), (i, s)
            assert s.line <= s.end_line <= len(lines), (i, s)
            assert 1 <= s.col <= len(lines[s.line - 1]) + 1, (i, s)
            # exclusive end may sit one past the end-of-line caret
            assert 1 <= s.end_col <= len(lines[s.end_line - 1]) + 2, (i, s)
            assert (s.end_line, s.end_col) >= (s.line, s.col), (i, s)


# -----------------------------------------------------------------------
# 10. fresh latents are standard-normal at the advertised resolution

@criterion(10, "latent-unit-gaussian", budget_s=1.0)
def test_10_latent_statistics():
    for seed in (0, 7, 123):
        z = init_latent((512, 512), seed)
        assert z.shape == (512, 512) and z.dtype == np.float32
        assert abs(float(z.mean())) <= 0.02
        assert abs(float(z.var()) - 1.0) <= 0.02

import asyncio

import pytest

from src.pipelines.base import BasePipeline, PipelineContext, verdict, within
from src.pipelines.factory import PipelineRegistryFactory, create_registry
from src.pipelines.registry import PipelineRegistry
from src.utils.config import Pipeline, parse_config_text
from src.utils.errors import DomainError

from ..conftest import SEED

CUTPOINT_CONFIG = """\
pipeline: cutpoints
seed: {seed}
d: 1
s: 2.0
beta: 0.0
L: 64
walks:
  steps: 64
  count: 100
"""


class ToyPipeline(BasePipeline):
    checks = ("first", "second", "third")

    def __init__(self, failing=None):
        super().__init__("toy", "Checks that record their call order")
        self.failing = failing
        self.calls = []

    def _check(self, name, ctx):
        self.calls.append(name)
        if name == self.failing:
            raise DomainError(f"{name} went wrong")
        return {"value": len(self.calls)}, [verdict(name, "calls", len(self.calls), "report only", None)]

    def check_first(self, ctx):
        return self._check("first", ctx)

    def check_second(self, ctx):
        return self._check("second", ctx)

    def check_third(self, ctx):
        return self._check("third", ctx)


class BrokenPipeline(ToyPipeline):
    def run(self, ctx):
        raise ValueError("worker died")


@pytest.fixture
def ctx(tmp_path, cfg_text):
    return PipelineContext(parse_config_text(cfg_text), tmp_path)


def test_checks_run_in_declaration_order(ctx):
    toy = ToyPipeline()
    result = toy.run(ctx)
    assert result.success and result.error is None
    assert toy.calls == ["first", "second", "third"]
    assert list(result.result) == ["first", "second", "third"]
    assert [s.stage for s in ctx.logger.records] == ["first", "second", "third"]


def test_failing_check_stops_the_pipeline(ctx):
    toy = ToyPipeline(failing="second")
    result = toy.run(ctx)
    assert not result.success
    assert toy.calls == ["first", "second"]
    assert list(result.result) == ["first"]
    assert result.error.startswith("[toy.second] DomainError")
    assert ctx.logger.records[1].status == "failed"


def test_selected_subset_keeps_declaration_order(tmp_path, cfg_text):
    config = parse_config_text(cfg_text + "checks: [third, first]\n")
    toy = ToyPipeline()
    toy.run(PipelineContext(config, tmp_path))
    assert toy.calls == ["first", "third"]
    assert toy.validate_checks(["fourth"]) == ["Unknown check for toy: fourth"]


def test_registry_rejects_unknown_names(ctx, cfg_text, tmp_path):
    registry = PipelineRegistry()
    registry.register(ToyPipeline())
    missing = asyncio.run(registry.execute_pipeline("nope", ctx))
    assert not missing.success and "not found" in missing.error
    bad = PipelineContext(parse_config_text(cfg_text + "checks: [fourth]\n"), tmp_path)
    invalid = asyncio.run(registry.execute_pipeline("toy", bad))
    assert invalid.error.startswith("Check validation failed")


def test_registry_converts_exceptions(ctx):
    registry = PipelineRegistry()
    registry.register(BrokenPipeline())
    ctx.logger.start("first")
    result = asyncio.run(registry.execute_pipeline("toy", ctx))
    assert not result.success
    assert result.error == "[toy] ValueError: worker died"
    assert ctx.logger.records[0].status == "failed"


def test_registry_describe_and_clear():
    registry = PipelineRegistry()
    registry.register(ToyPipeline())
    assert registry.describe()["toy"]["checks"] == ["first", "second", "third"]
    registry.clear()
    assert registry.list_pipelines() == []


def test_factory_registers_every_pipeline():
    registry = PipelineRegistryFactory().create_registry()
    assert sorted(registry.list_pipelines()) == sorted(p.value for p in Pipeline)
    assert create_registry() is create_registry()


def test_context_caches_environments(ctx):
    env = ctx.environment()
    assert ctx.environment() is env
    assert env.seed == ctx.config.seed
    other = ctx.environment(1)
    assert other.seed != env.seed
    ctx.forget("env:1:")
    assert ctx.environment(1) is not other
    assert ctx.start_vertex(env) == 0


def test_context_writes_json(ctx, tmp_path):
    written = ctx.write_json("report.json", {"b": 1, "a": [1.5]})
    assert written in ctx.artifacts
    assert (tmp_path / "report.json").read_text().startswith('{\n  "a"')


def test_verdict_helpers():
    assert within(0.52, 0.5, 0.05) and not within(float("nan"), 0.5, 1.0)
    assert verdict("x", "y", float("inf"), "t", None).value is None


def test_cutpoint_pipeline_on_bare_ring(tmp_path):
    config = parse_config_text(CUTPOINT_CONFIG.format(seed=SEED))
    pipeline = create_registry().get_pipeline("cutpoints")
    result = pipeline.run(PipelineContext(config, tmp_path))
    assert result.success, result.error
    chain = result.result["chain"]
    assert chain["K_star_mean"] == pytest.approx(1.0)
    assert chain["symmetry_error"] == 0.0
    assert [v.passed for v in result.checks[:2]] == [True, True]
    assert result.checks[-1].passed is None
    assert (tmp_path / "cutpoint_chains.json").exists()

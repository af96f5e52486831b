import functools
import json
import random
from fractions import Fraction
from pathlib import Path

from hypothesis import assume
from hypothesis import strategies as st

from tamagawa.curve import ModelMap, SingularCurveError, WeierstrassModel


def random_curve(rng: random.Random, bound: int = 50) -> WeierstrassModel:
    while True:
        try:
            return WeierstrassModel.from_ainvs([rng.randint(-bound, bound) for _ in range(5)])
        except SingularCurveError:
            continue


def random_model_map(rng: random.Random) -> ModelMap:
    def q():
        return Fraction(rng.randint(-20, 20), rng.randint(1, 6))

    u = Fraction(rng.choice((1, -1)) * rng.randint(1, 12), rng.randint(1, 12))
    return ModelMap(u, q(), q(), q())


@st.composite
def curves(draw, bound: int = 60):
    a = draw(st.lists(st.integers(-bound, bound), min_size=5, max_size=5))
    try:
        return WeierstrassModel.from_ainvs(a)
    except SingularCurveError:
        assume(False)


fractions = st.builds(Fraction, st.integers(-50, 50), st.integers(1, 12))
nonzero_fractions = st.builds(
    Fraction, st.integers(1, 30).flatmap(lambda n: st.sampled_from([n, -n])), st.integers(1, 12)
)
model_maps = st.builds(ModelMap, nonzero_fractions, fractions, fractions, fractions)


SCHEMA_DIR = Path(__file__).resolve().parent.parent / "docs" / "schemas"


@functools.cache
def _registry():
    from referencing import Registry, Resource

    resources = []
    for path in SCHEMA_DIR.glob("*.schema.json"):
        contents = json.loads(path.read_text())
        resources.append((contents["$id"], Resource.from_contents(contents)))
    return Registry().with_resources(resources)


def validate(name: str, instance) -> None:
    """Validate instance against docs/schemas/<name>.schema.json, resolving cross-file $refs."""
    from jsonschema import Draft202012Validator

    schema = json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text())
    Draft202012Validator(schema, registry=_registry()).validate(instance)

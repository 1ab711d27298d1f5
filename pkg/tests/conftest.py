import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cmolcad import parse_bench, carve_sequential, sweep, to_nor

BENCH_DIR = Path(__file__).parent.parent / "benches"


@pytest.fixture(scope="session")
def adder_bench() -> str:
    return (BENCH_DIR / "adder.bench").read_text()


@pytest.fixture(scope="session")
def s27_bench() -> str:
    return (BENCH_DIR / "s27.bench").read_text()


@pytest.fixture(scope="session")
def adder_nor(adder_bench):
    return to_nor(sweep(carve_sequential(parse_bench(adder_bench))))


@pytest.fixture(scope="session")
def s27_nor(s27_bench):
    return to_nor(sweep(carve_sequential(parse_bench(s27_bench))))

from pathlib import Path

import pytest

import ruleform
from ruleform.catalog import load_catalog
from ruleform.dsl import parse_rulebase

DATA_DIR = Path(ruleform.__file__).parent / "data"


@pytest.fixture(scope="session")
def demo_catalog_path() -> Path:
    return DATA_DIR / "demo_catalog.yaml"


@pytest.fixture(scope="session")
def d2d6_rules_path() -> Path:
    return DATA_DIR / "d2d6.rules"


@pytest.fixture(scope="session")
def demo_rules_path() -> Path:
    return DATA_DIR / "demo.rules"


@pytest.fixture(scope="session")
def demo_catalog(demo_catalog_path):
    return load_catalog(demo_catalog_path.read_text(encoding="utf-8"))


@pytest.fixture()
def d2d6(demo_catalog, d2d6_rules_path):
    return parse_rulebase(d2d6_rules_path.read_text(encoding="utf-8"), demo_catalog)


@pytest.fixture()
def demo_rulebase(demo_catalog, demo_rules_path):
    return parse_rulebase(demo_rules_path.read_text(encoding="utf-8"), demo_catalog)

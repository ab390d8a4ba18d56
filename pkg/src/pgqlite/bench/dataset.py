"""Seeded synthetic datasets for the benchmark schema."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..graphcat import parse_script
from ..relstore import Database, dump_csv
from ..session import Session, build_session, builtin_ddl, create_database, open_session

CITY_POOL = ("Paris", "Berlin", "Rome", "Madrid", "Vienna", "Lisbon")
ACCOUNT_TYPES = ("checking", "savings")
TABLE_ORDER = ("Person", "Account", "Own", "Friend", "Transfer")
MANIFEST = "manifest.json"


@dataclass(frozen=True)
class DatasetSpec:
    """Dataset size and seed; the other counts follow from ``n_transfers`` unless given."""

    n_transfers: int
    seed: int = 0
    n_persons: int | None = None
    n_accounts: int | None = None
    n_friends: int | None = None
    cities: tuple[str, ...] = CITY_POOL
    amount_range: tuple[float, float] = (1.0, 10000.0)
    since_range: tuple[int, int] = (2000, 2024)

    def __post_init__(self) -> None:
        for name in ("n_persons", "n_accounts", "n_friends"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, self.n_transfers)
        if min(self.n_transfers, self.n_persons, self.n_accounts, self.n_friends) <= 0:
            raise ValueError("dataset counts must be positive")
        if self.n_accounts < 2 and self.n_transfers:
            raise ValueError("transfers without self-loops need at least two accounts")
        if self.n_persons < 2 and self.n_friends:
            raise ValueError("friendships between distinct persons need at least two persons")
        if not self.cities:
            raise ValueError("city pool is empty")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass
class Dataset:
    spec: DatasetSpec
    tables: dict[str, list[tuple]] = field(default_factory=dict)

    def to_database(self) -> Database:
        db = create_database(parse_script(builtin_ddl()))
        for name in TABLE_ORDER:
            db.table(name).append_rows(self.tables[name])
        return db

    def session(self) -> Session:
        return build_session(self.to_database(), parse_script(builtin_ddl()))

    def csv_text(self) -> dict[str, str]:
        db = self.to_database()
        return {name: dump_csv(db.table(name)) for name in TABLE_ORDER}


def _distinct_pair(rng: np.random.Generator, n: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """``count`` ordered pairs over 1..n, uniform among pairs with distinct ends."""
    first = rng.integers(0, n, size=count)
    offset = rng.integers(1, n, size=count)
    return first + 1, (first + offset) % n + 1


def generate(spec: DatasetSpec) -> Dataset:
    """Independent uniform draws from one seeded PRNG; foreign keys hold by construction."""
    rng = np.random.default_rng(spec.seed)
    cities = rng.integers(0, len(spec.cities), size=spec.n_persons)
    person = [(i + 1, f"person_{i + 1}", spec.cities[c]) for i, c in enumerate(cities.tolist())]
    kinds = rng.integers(0, len(ACCOUNT_TYPES), size=spec.n_accounts)
    account = [(i + 1, ACCOUNT_TYPES[k]) for i, k in enumerate(kinds.tolist())]
    owned = rng.integers(1, spec.n_accounts + 1, size=spec.n_persons)
    own = [(i + 1, a) for i, a in enumerate(owned.tolist())]
    p1, p2 = _distinct_pair(rng, spec.n_persons, spec.n_friends)
    since = rng.integers(spec.since_range[0], spec.since_range[1] + 1, size=spec.n_friends)
    friend = list(zip(p1.tolist(), p2.tolist(), since.tolist()))
    src, dst = _distinct_pair(rng, spec.n_accounts, spec.n_transfers)
    lo, hi = spec.amount_range
    amounts = np.round(rng.uniform(lo, hi, size=spec.n_transfers), 2)
    transfer = [(i + 1, a, b, float(m)) for i, (a, b, m) in enumerate(zip(src.tolist(), dst.tolist(), amounts.tolist()))]
    return Dataset(spec, {"Person": person, "Account": account, "Own": own, "Friend": friend, "Transfer": transfer})


def write_bundle(dataset: Dataset, out_dir: str | Path) -> Path:
    """Five CSVs plus ``manifest.json`` recording the spec and row counts."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    for name, text in dataset.csv_text().items():
        (root / f"{name}.csv").write_text(text, encoding="utf-8")
    spec = asdict(dataset.spec)
    manifest = {
        "version": 1,
        "spec": spec,
        "rows": {name: len(dataset.tables[name]) for name in TABLE_ORDER},
    }
    (root / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return root


def load_bundle(path: str | Path) -> Session:
    return open_session(path)


def read_manifest(path: str | Path) -> DatasetSpec:
    data = json.loads((Path(path) / MANIFEST).read_text(encoding="utf-8"))
    spec = data["spec"]
    for key in ("cities", "amount_range", "since_range"):
        spec[key] = tuple(spec[key])
    return DatasetSpec(**spec)

"""Machine-readable run reports with a lossless JSON round trip."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from . import __version__


@dataclass(frozen=True)
class Record:
    """One verified check.  ``verdict`` is ``pass`` or ``fail``."""

    name: str
    verdict: str
    margin: str | None = None
    paper_ref: str | None = None
    timing_ms: float | None = None
    detail: str = ""
    data: dict | None = None

    def __post_init__(self) -> None:
        if self.verdict not in ("pass", "fail"):
            raise ValueError(f"unknown verdict {self.verdict!r}")


@dataclass(frozen=True)
class RunReport:
    command: list[str]
    seed: int | None = None
    records: tuple[Record, ...] = ()
    rows: tuple[dict, ...] = ()
    version: str = __version__
    status: str = field(default="")

    def __post_init__(self) -> None:
        # assembly is order independent: records are kept sorted by name
        ordered = tuple(sorted(self.records, key=lambda r: r.name))
        object.__setattr__(self, "records", ordered)
        object.__setattr__(self, "rows", tuple(self.rows))
        expected = "fail" if any(r.verdict == "fail" for r in ordered) else "pass"
        if self.status and self.status != expected:
            raise ValueError(f"status {self.status!r} contradicts the records")
        object.__setattr__(self, "status", expected)

    @property
    def exit_code(self) -> int:
        return 0 if self.status == "pass" else 1

    def to_json_obj(self) -> dict:
        obj = asdict(self)
        obj["records"] = [asdict(r) for r in self.records]
        obj["rows"] = list(self.rows)
        obj["exit_status"] = self.exit_code
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> RunReport:
        obj = json.loads(text)
        obj.pop("exit_status", None)
        records = tuple(Record(**r) for r in obj.pop("records"))
        return cls(records=records, rows=tuple(obj.pop("rows")), **obj)

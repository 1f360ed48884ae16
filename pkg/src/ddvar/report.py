"""Check reports shared by the verification entry points."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import ZeroTest

__all__ = ["Check", "Report"]


@dataclass
class Check:
    label: str
    test: ZeroTest
    detail: object = None

    @property
    def passed(self):
        return bool(self.test)


@dataclass
class Report:
    """Named list of identity checks; passes when every check does."""

    check: str
    items: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return all(item.passed for item in self.items)

    def add(self, label, test, detail=None):
        self.items.append(Check(label, test, detail))
        return test

    def __bool__(self):
        return self.passed

    def kv_head(self):
        """``check=COMMAND`` plus ``name=ITEM`` when the check names an item."""
        command, _, name = self.check.partition(" ")
        return f"check={command}" + (f" name={name}" if name else "")

    def lines(self, fmt="text"):
        """Report rendered line by line (``text`` or key/value ``kv``)."""
        out = []
        for item in self.items:
            verdict = "pass" if item.passed else "fail"
            if fmt == "kv":
                line = f"{self.kv_head()} item={item.label} verdict={verdict} test={item.test}"
                if item.test.witness is not None and not item.passed:
                    line += " witness=" + ",".join(f"{k}:{v}" for k, v in sorted(item.test.witness.items()))
            else:
                line = f"{self.check} {item.label}: {verdict} [{item.test}]"
                if item.detail is not None:
                    line += f"  {item.detail}"
            out.append(line)
        for note in self.notes:
            out.append(f"{self.kv_head()} note={note!r}" if fmt == "kv" else f"  note: {note}")
        return out

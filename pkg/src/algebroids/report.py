"""Labelled residual collections shared by all verification passes.

Every structural check in the package boils down to "this list of
expressions must be identically zero".  A ResidualReport keeps those
expressions together with stable human-readable labels so that command
line output, JSON reports and test assertions all see the same data in
the same order.
"""


class ResidualReport:
    """An ordered list of (label, Expr) residual entries."""

    def __init__(self):
        self.entries = []

    def add(self, label, value):
        """Append a residual.

        value may be a single Expr or an arbitrarily nested sequence of
        them; nested entries get bracketed index suffixes appended to the
        label, 1-based to match frame numbering.
        """
        if hasattr(value, "is_zero") and not isinstance(value, (list, tuple)):
            self.entries.append((label, value))
            return
        seq = list(value)
        if seq and not hasattr(seq[0], "is_zero"):
            # nested: recurse with [i][j]... style labels
            for i, item in enumerate(seq, start=1):
                self.add("%s[%d]" % (label, i), item)
            return
        for i, item in enumerate(seq, start=1):
            self.entries.append(("%s[%d]" % (label, i), item))

    def extend(self, other):
        self.entries.extend(other.entries)

    @property
    def is_all_zero(self):
        return all(expr.is_zero for _, expr in self.entries)

    def failing(self):
        """Labels of the entries that are not identically zero."""
        return [label for label, expr in self.entries if not expr.is_zero]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __repr__(self):
        bad = len(self.failing())
        return "ResidualReport(%d entries, %d nonzero)" % (len(self.entries), bad)

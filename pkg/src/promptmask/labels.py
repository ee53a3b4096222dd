"""The closed set of PII entity labels and spelling normalization.

Each label has a canonical UPPER_SNAKE name (used in placeholder tokens and
on-disk formats) and a lowercase spelling (used in detector prompts and wire
requests to external NER services).
"""

from __future__ import annotations

import enum

from .errors import UnknownLabel


class EntityLabel(enum.Enum):
    """One of the ten PII categories handled by the pipeline.

    The enum value is the spelling external detectors expect; the enum name
    is the canonical form used everywhere else.
    """

    PERSON = "person"
    CASE_NUMBER = "case_number"
    DATE_OF_BIRTH = "date_of_birth"
    ADDRESS = "address"
    COMPANY = "company"
    TAX_ID = "tax ID"
    LOCATION = "location"
    DATE = "date"
    LAW_OFFICE = "law office"
    NATIONALITY = "nationality"

    @property
    def canonical_name(self) -> str:
        return self.name

    @property
    def spelling(self) -> str:
        return self.value

    def __repr__(self) -> str:  # keeps test diffs readable
        return f"EntityLabel.{self.name}"


_BY_NORMALIZED = {label.name.lower(): label for label in EntityLabel}


def canonical_label(spelling: str) -> EntityLabel:
    """Map a label spelling to its EntityLabel.

    Trims, lowercases, and converts spaces to underscores before matching,
    so "tax ID", "TAX_ID", and " tax id " all resolve to TAX_ID. Raises
    UnknownLabel for anything outside the closed set.
    """
    normalized = spelling.strip().lower().replace(" ", "_")
    try:
        return _BY_NORMALIZED[normalized]
    except KeyError:
        raise UnknownLabel(spelling) from None


ALL_LABELS: tuple[EntityLabel, ...] = tuple(EntityLabel)

import re

import pytest

from promptmask.errors import UnknownLabel
from promptmask.labels import ALL_LABELS, EntityLabel, canonical_label


def test_closed_set_has_ten_members():
    assert len(ALL_LABELS) == 10
    names = {l.canonical_name for l in ALL_LABELS}
    assert names == {
        "PERSON", "CASE_NUMBER", "DATE_OF_BIRTH", "ADDRESS", "COMPANY",
        "TAX_ID", "LOCATION", "DATE", "LAW_OFFICE", "NATIONALITY",
    }


def test_name_spelling_bijection():
    spellings = [l.spelling for l in ALL_LABELS]
    assert len(set(spellings)) == len(spellings)
    for label in ALL_LABELS:
        assert re.fullmatch(r"[A-Z][A-Z_]*", label.canonical_name)
        assert canonical_label(label.spelling) is label


def test_spellings_match_detector_prompt_list():
    assert [l.spelling for l in ALL_LABELS] == [
        "person", "case_number", "date_of_birth", "address", "company",
        "tax ID", "location", "date", "law office", "nationality",
    ]


def test_canonical_label_normalization():
    assert canonical_label("tax ID") is EntityLabel.TAX_ID
    assert canonical_label("law office") is EntityLabel.LAW_OFFICE
    assert canonical_label("PERSON") is EntityLabel.PERSON
    assert canonical_label("  Date_Of_Birth ") is EntityLabel.DATE_OF_BIRTH


def test_canonical_label_rejects_unknown():
    with pytest.raises(UnknownLabel) as err:
        canonical_label("favorite_color")
    assert "favorite_color" in str(err.value)

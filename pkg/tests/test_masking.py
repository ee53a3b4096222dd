import logging
import random

import pytest

from promptmask.detection import EntityMention
from promptmask.errors import CorruptVault, OverlapViolation
from promptmask.labels import ALL_LABELS
from promptmask.labels import EntityLabel as L
from promptmask.masking import (
    Vault,
    load_vault,
    mask,
    placeholder_for,
    save_vault,
    unmask,
    vault_from_dict,
    vault_to_dict,
)


def _m(surface, label, start, end, source="pattern"):
    return EntityMention(surface, label, start, end, source)


def _sentence_mentions():
    text = "My name is John Doe, I live in London."
    return text, [_m("John Doe", L.PERSON, 11, 19), _m("London", L.LOCATION, 31, 37)]


# ---------------------------------------------------------------------------
# placeholder_for

def test_first_token_per_label():
    v = Vault(session_id="s")
    assert placeholder_for(v, "John Doe", L.PERSON) == "[PERSON_1]"
    assert placeholder_for(v, "12 Elm St", L.ADDRESS) == "[ADDRESS_1]"


def test_repeat_lookup_is_stable():
    v = Vault(session_id="s")
    first = placeholder_for(v, "John Doe", L.PERSON)
    assert placeholder_for(v, "John Doe", L.PERSON) == first == "[PERSON_1]"
    assert v.counters[L.PERSON] == 2


def test_second_distinct_surface_increments():
    v = Vault(session_id="s")
    placeholder_for(v, "John Doe", L.PERSON)
    assert placeholder_for(v, "Jane Roe", L.PERSON) == "[PERSON_2]"


def test_same_surface_two_labels_two_tokens():
    v = Vault(session_id="s")
    as_person = placeholder_for(v, "Washington", L.PERSON)
    as_location = placeholder_for(v, "Washington", L.LOCATION)
    assert as_person == "[PERSON_1]"
    assert as_location == "[LOCATION_1]"
    assert as_person != as_location


def test_forward_reverse_stay_inverse():
    v = Vault(session_id="s")
    rng = random.Random(3)
    for _ in range(500):
        surface = f"surface-{rng.randint(1, 40)}"
        placeholder_for(v, surface, rng.choice(ALL_LABELS))
        assert len(v.forward) == len(v.reverse)
        assert all(v.reverse[tok] == key for key, tok in v.forward.items())


# ---------------------------------------------------------------------------
# mask

def test_mask_example_sentence():
    text, mentions = _sentence_mentions()
    v = Vault(session_id="s")
    result = mask(text, mentions, v)
    assert result.masked_text == "My name is [PERSON_1], I live in [LOCATION_1]."
    assert [(e.placeholder, e.surface) for e in result.vault_delta] == [
        ("[PERSON_1]", "John Doe"), ("[LOCATION_1]", "London")]


def test_mask_without_mentions_is_identity():
    v = Vault(session_id="s")
    result = mask("no entities here", [], v)
    assert result.masked_text == "no entities here"
    assert result.vault_delta == [] and result.applied == []


def test_repeated_surface_shares_token():
    text = "John Doe met John Doe"
    mentions = [_m("John Doe", L.PERSON, 0, 8), _m("John Doe", L.PERSON, 13, 21)]
    v = Vault(session_id="s")
    result = mask(text, mentions, v)
    assert result.masked_text == "[PERSON_1] met [PERSON_1]"
    assert v.counters[L.PERSON] == 2
    assert len(result.vault_delta) == 1


def test_mask_rejects_overlap_and_disorder():
    v = Vault(session_id="s")
    text = "John Doe met Ann"
    overlapping = [_m("John Doe", L.PERSON, 0, 8), _m("Doe met", L.PERSON, 5, 12)]
    with pytest.raises(OverlapViolation):
        mask(text, overlapping, v)
    unsorted = [_m("Ann", L.PERSON, 13, 16), _m("John Doe", L.PERSON, 0, 8)]
    with pytest.raises(OverlapViolation):
        mask(text, unsorted, v)


def test_mask_rejects_surface_mismatch():
    with pytest.raises(ValueError):
        mask("John Doe", [_m("Jane Doe", L.PERSON, 0, 8)], Vault(session_id="s"))


def test_applied_replay_reconstructs_original():
    text = "a John Doe b London c John Doe"
    mentions = [
        _m("John Doe", L.PERSON, 2, 10),
        _m("London", L.LOCATION, 13, 19),
        _m("John Doe", L.PERSON, 22, 30),
    ]
    result = mask(text, mentions, Vault(session_id="s"))
    rebuilt = result.masked_text.encode()
    for applied in reversed(result.applied):
        rebuilt = (rebuilt[:applied.masked_start]
                   + applied.mention.surface.encode()
                   + rebuilt[applied.masked_end:])
    assert rebuilt.decode() == text


def test_mask_multibyte_text():
    text = "José lives in Zürich."
    mentions = [_m("José", L.PERSON, 0, 5), _m("Zürich", L.LOCATION, 15, 22)]
    v = Vault(session_id="s")
    result = mask(text, mentions, v)
    assert result.masked_text == "[PERSON_1] lives in [LOCATION_1]."
    assert unmask(result.masked_text, v).text == text


def test_mask_warns_when_surface_survives(caplog):
    # only the first Paris is a mention; the survivor is flagged, not fatal
    text = "Paris is Paris"
    with caplog.at_level(logging.WARNING, logger="promptmask.masking"):
        result = mask(text, [_m("Paris", L.LOCATION, 0, 5)], Vault(session_id="s"))
    assert result.masked_text == "[LOCATION_1] is Paris"
    assert any("Paris" in r.message for r in caplog.records)


# ---------------------------------------------------------------------------
# unmask

def test_unmask_known_token():
    v = Vault(session_id="s")
    placeholder_for(v, "John Doe", L.PERSON)
    result = unmask("[PERSON_1] qualifies.", v)
    assert result.text == "John Doe qualifies."
    assert result.unresolved == []


def test_unmask_unknown_token_left_verbatim():
    v = Vault(session_id="s")
    placeholder_for(v, "John Doe", L.PERSON)
    result = unmask("[PERSON_9] qualifies.", v)
    assert result.text == "[PERSON_9] qualifies."
    assert result.unresolved == ["[PERSON_9]"]


def test_unmask_plain_text():
    result = unmask("plain text", Vault(session_id="s"))
    assert result.text == "plain text" and result.unresolved == []


def test_unmask_is_single_pass():
    # a surface that looks like another vault token must not be re-resolved
    v = Vault(session_id="s")
    v.forward[("[LOCATION_1]", L.PERSON)] = "[PERSON_1]"
    v.reverse["[PERSON_1]"] = ("[LOCATION_1]", L.PERSON)
    v.forward[("Paris", L.LOCATION)] = "[LOCATION_1]"
    v.reverse["[LOCATION_1]"] = ("Paris", L.LOCATION)
    result = unmask("[PERSON_1]", v)
    assert result.text == "[LOCATION_1]"
    assert result.unresolved == []


def test_round_trip_property():
    rng = random.Random(11)
    words = ["alpha", "bravo", "café", "delta", "écho", "foxtrot", "golf"]
    for _ in range(100):
        tokens = [rng.choice(words) for _ in range(rng.randint(1, 30))]
        text = " ".join(tokens)
        table_text = text.encode()
        # mark every occurrence of one chosen word as a mention
        target = rng.choice(words)
        mentions = []
        pos = 0
        while True:
            idx = text.find(target, pos)
            if idx < 0:
                break
            start = len(text[:idx].encode())
            mentions.append(_m(table_text[start:start + len(target.encode())].decode(),
                               rng.choice(ALL_LABELS), start, start + len(target.encode())))
            pos = idx + len(target)
        v = Vault(session_id="s")
        masked = mask(text, mentions, v).masked_text
        assert unmask(masked, v).text == text


# ---------------------------------------------------------------------------
# vault serialization

def test_vault_file_round_trip(tmp_path):
    v = Vault(session_id="abc")
    placeholder_for(v, "John Doe", L.PERSON)
    placeholder_for(v, "Jane Roe", L.PERSON)
    placeholder_for(v, "12-3456789", L.TAX_ID)
    path = tmp_path / "vault.json"
    save_vault(v, path)
    loaded = load_vault(path)
    assert loaded == v
    # canonical bytes: re-saving the loaded vault changes nothing
    save_vault(loaded, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_vault_dict_round_trip():
    v = Vault(session_id="abc")
    placeholder_for(v, "José", L.PERSON)
    assert vault_from_dict(vault_to_dict(v)) == v


def test_truncated_vault_file(tmp_path):
    path = tmp_path / "vault.json"
    v = Vault(session_id="abc")
    placeholder_for(v, "John Doe", L.PERSON)
    save_vault(v, path)
    path.write_bytes(path.read_bytes()[:25])
    with pytest.raises(CorruptVault):
        load_vault(path)


def test_vault_rejects_gap_in_indices():
    data = vault_to_dict(Vault(session_id="s"))
    data["entries"] = [{"placeholder": "[PERSON_2]", "surface": "x", "label": "PERSON"}]
    data["counters"]["PERSON"] = 3
    with pytest.raises(CorruptVault):
        vault_from_dict(data)


def test_vault_rejects_token_label_mismatch():
    data = vault_to_dict(Vault(session_id="s"))
    data["entries"] = [{"placeholder": "[PERSON_1]", "surface": "x", "label": "LOCATION"}]
    data["counters"]["LOCATION"] = 2
    with pytest.raises(CorruptVault):
        vault_from_dict(data)

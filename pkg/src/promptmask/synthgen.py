"""Synthetic immigration-law prompt generator with exact gold annotations.

Fabricates client/employer identities from bundled pools, draws scenario
metadata (practice area, subfield, document title, task type), renders one of
four task templates, and records every entity occurrence as ground truth by
scanning the finished prompt. Everything is a pure function of (n, seed,
mode, tables version), so dataset builds are byte-reproducible.
"""

from __future__ import annotations

import json
import random
import zlib
from dataclasses import dataclass
from pathlib import Path

from .errors import UnknownTaskType
from .labels import EntityLabel

TABLES_VERSION = "1"

TASK_TYPES = ("Summarization", "Translation", "Legal Analysis", "Drafting")

DOCUMENT_TITLES = (
    "Employer Support Letter",
    "Affidavit of Support",
    "Personal Statement",
    "Birth Certificate",
    "Marriage Certificate",
    "Tax Returns",
    "Work Authorization Document",
    "Medical Examination Report",
    "Police Clearance Certificate",
    "Immigration History Summary",
)

PRACTICE_AREAS = (
    ("Visa Applications", ("Family-based visa", "Employment-based visa", "Student visa")),
    ("Green Cards", ("Adjustment of status", "PERM processing")),
    ("Deportation Defense", ("Removal proceedings", "Cancellation of removal")),
    ("Citizenship and Naturalization", ("Citizenship applications", "Dual citizenship resolution")),
    ("Asylum and Refugee Law", ("Filing asylum applications", "Defending refugees")),
    ("DACA", ("Initial applications", "Renewals")),
    ("Employment Compliance", ("I-9 verification", "E-Verify compliance")),
)

FIRST_NAMES = (
    "Amara", "Bao", "Carmen", "Dmitri", "Efe", "Farid", "Greta", "Hiro",
    "Ingrid", "Jonas", "Katya", "Liora", "Mireille", "Nadia", "Otto", "Priya",
    "Quentin", "Rosa", "Stefan", "Tomas", "Ulrike", "Viktor", "Wanda",
    "Ximena", "Yusuf", "Zofia", "Anouk", "Bruno",
)

LAST_NAMES = (
    "Okonkwo", "Varga", "Lindqvist", "Moreau", "Takeda", "Petrov", "Alvarez",
    "Kimura", "Osei", "Novak", "Haddad", "Bergstrom", "Castillo", "Duarte",
    "Eriksen", "Fontaine", "Grbic", "Huong", "Ivanova", "Jansen", "Kowalski",
    "Laurent", "Mbeki", "Nakamura", "Obrador", "Pavlic", "Quispe", "Rahimi",
    "Sandoval", "Tanaka",
)

NATIONALITIES = (
    "Brazilian", "Canadian", "Chilean", "Colombian", "Egyptian", "Filipino",
    "German", "Ghanaian", "Indian", "Japanese", "Kenyan", "Mexican",
    "Moroccan", "Nigerian", "Peruvian", "Polish", "Romanian", "Turkish",
    "Ukrainian", "Vietnamese",
)

VISA_TYPES = (
    "an H-1B specialty occupation visa",
    "an F-1 student visa",
    "a B-2 visitor visa",
    "an L-1A intracompany transferee visa",
    "a TN professional visa",
    "an O-1 extraordinary ability visa",
    "a J-1 exchange visitor visa",
    "an E-2 treaty investor visa",
)

STREET_NAMES = (
    "Alderfield", "Birchwood", "Cobblestone", "Dunmore", "Elmhurst",
    "Foxglove", "Gablewood", "Hollybrook", "Ironwood", "Juniper", "Kestrel",
    "Larchmont", "Meadowlark", "Nettleton", "Oakhurst", "Pinecrest",
)

STREET_TYPES = ("Street", "Avenue", "Road", "Boulevard", "Lane", "Drive")

CITIES = (
    "Sacramento", "Tucson", "Boise", "Omaha", "Denver", "Portland", "Memphis",
    "Tulsa", "Fresno", "Raleigh", "Spokane", "Laredo", "Wichita", "Anchorage",
    "Savannah", "Dayton",
)

COMPANIES = (
    "Bluepine Manufacturing", "Cartwheel Logistics", "Deltaforge Industries",
    "Eastbrook Analytics", "Fairweather Foods", "Glimmervale Studios",
    "Harborline Shipping", "Ironquill Robotics", "Jetstream Aerospace",
    "Lumenarc Software", "Northgate Textiles", "Opaline Ceramics",
    "Polaris Freight", "Quarryhill Farms", "Silverbough Media", "Tessellate Labs",
)

LAW_OFFICES = (
    "Abernathy & Crane LLP",
    "Birchall Immigration Law Group",
    "Calderwood Legal Associates",
    "Drummond & Vance Attorneys",
    "Ellington Law Offices",
    "Farnsworth Immigration Partners",
    "Greenleaf & Holt LLP",
    "Ibarra Law Group",
    "Kessler & Pruitt Immigration Law",
    "Montrose Legal Services",
)

CASE_PREFIXES = ("IMM", "VSA", "NAT", "ASY", "DEF", "GRC", "EMP", "DAC")

MONTHS = (
    "January", "February", "March", "April", "May", "June", "July", "August",
    "September", "October", "November", "December",
)

_DAYS_IN_MONTH = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


@dataclass
class GeneratorTables:
    """Locale pools and scenario tables the generator samples from."""

    first_names: tuple = FIRST_NAMES
    last_names: tuple = LAST_NAMES
    nationalities: tuple = NATIONALITIES
    visa_types: tuple = VISA_TYPES
    street_names: tuple = STREET_NAMES
    street_types: tuple = STREET_TYPES
    cities: tuple = CITIES
    companies: tuple = COMPANIES
    law_offices: tuple = LAW_OFFICES
    case_prefixes: tuple = CASE_PREFIXES
    document_titles: tuple = DOCUMENT_TITLES
    practice_areas: tuple = PRACTICE_AREAS
    task_types: tuple = TASK_TYPES
    version: str = TABLES_VERSION


DEFAULT_TABLES = GeneratorTables()


@dataclass
class EntityBundle:
    """One record's fabricated identities, as placed into the templates."""

    client_name: str
    client_nationality: str
    visa_type: str
    home_address: str
    case_id: str
    filing_date: str
    employer_name: str
    employer_tax_id: str
    employer_address: str
    document_title: str


@dataclass
class Scenario:
    practice_area: str
    subfield: str
    document_title: str
    task_type: str


@dataclass
class SyntheticRecord:
    id: str
    task_type: str
    practice_area: str
    subfield: str
    prompt: str
    gold: list[tuple[str, EntityLabel]]
    fake_text_source: str


def _render_date(rng: random.Random) -> str:
    year = rng.randint(2019, 2025)
    month = rng.randint(1, 12)
    day = rng.randint(1, _DAYS_IN_MONTH[month - 1])
    return f"{MONTHS[month - 1]} {day}, {year}"


def _render_address(rng: random.Random, tables: GeneratorTables) -> str:
    number = rng.randint(100, 9999)
    return f"{number} {rng.choice(tables.street_names)} {rng.choice(tables.street_types)}"


def fabricate_entities(
    rng: random.Random,
    tables: GeneratorTables = DEFAULT_TABLES,
    document_title: str | None = None,
) -> EntityBundle:
    """Draw one deterministic identity bundle from the pools.

    Tax ids follow NN-NNNNNNN and case ids [A-Z]{3}-\\d{4}-\\d{5}; the filing
    date renders as "Month D, YYYY". The employer address is redrawn while it
    collides with the home address so the two ADDRESS surfaces stay distinct.
    """
    client_name = f"{rng.choice(tables.first_names)} {rng.choice(tables.last_names)}"
    nationality = rng.choice(tables.nationalities)
    visa_type = rng.choice(tables.visa_types)
    home_address = _render_address(rng, tables)
    case_id = f"{rng.choice(tables.case_prefixes)}-{rng.randint(2019, 2025)}-{rng.randint(10000, 99999)}"
    filing_date = _render_date(rng)
    employer_name = rng.choice(tables.companies)
    employer_tax_id = f"{rng.randint(10, 99)}-{rng.randint(1000000, 9999999)}"
    employer_address = _render_address(rng, tables)
    # Distinct, non-nesting ADDRESS surfaces keep occurrence counts exact
    # (e.g. "123 Juniper Lane" hides inside "4123 Juniper Lane").
    while employer_address in home_address or home_address in employer_address:
        employer_address = _render_address(rng, tables)
    if document_title is None:
        document_title = rng.choice(tables.document_titles)
    return EntityBundle(
        client_name=client_name,
        client_nationality=nationality,
        visa_type=visa_type,
        home_address=home_address,
        case_id=case_id,
        filing_date=filing_date,
        employer_name=employer_name,
        employer_tax_id=employer_tax_id,
        employer_address=employer_address,
        document_title=document_title,
    )


def select_scenario(rng: random.Random, tables: GeneratorTables = DEFAULT_TABLES) -> Scenario:
    """Draw (practice area, subfield, document title, task type); the subfield
    always belongs to its practice area."""
    practice_area, subfields = rng.choice(tables.practice_areas)
    subfield = rng.choice(subfields)
    document_title = rng.choice(tables.document_titles)
    task_type = rng.choice(tables.task_types)
    return Scenario(practice_area, subfield, document_title, task_type)


FAKE_TEXT_LLM_PROMPT = (
    "\n"
    "    Generate a fake but realistic document excerpt for an immigration case based on the following scenario:\n"
    "\n"
    "    Practice Area: {practice_area}\n"
    "    Subfield: {subfield}\n"
    "    Client Name: {client_name}\n"
    "    Client Nationality: {client_nationality}\n"
    "    Visa Type: {visa_type}\n"
    "    Document Title: {document_title}\n"
    "\n"
    "    Generate a paragraph of fake text only.  \n"
    "    Provide the fake text strictly, without any explanations or additional content.\n"
    "    "
)


def _stable_pick(pool: tuple, *keys: str) -> str:
    """Deterministic pool pick derived from record content, not process state."""
    return pool[zlib.crc32("|".join(keys).encode("utf-8")) % len(pool)]


def generate_fake_text(
    bundle: EntityBundle,
    practice_area: str,
    subfield: str,
    mode: str,
    llm=None,
    tables: GeneratorTables = DEFAULT_TABLES,
) -> str:
    """Produce the document excerpt embedded in the prompt.

    "llm" mode sends the excerpt-generation prompt to a chat client and
    returns its reply verbatim; "offline" fills a fixed paragraph template
    from the same fields plus a content-derived city and law office, and
    performs no network operations.
    """
    if mode == "llm":
        if llm is None:
            raise ValueError("llm mode requires a chat client")
        prompt = FAKE_TEXT_LLM_PROMPT.format(
            practice_area=practice_area,
            subfield=subfield,
            client_name=bundle.client_name,
            client_nationality=bundle.client_nationality,
            visa_type=bundle.visa_type,
            document_title=bundle.document_title,
        )
        return llm.complete([("user", prompt)])
    if mode == "offline":
        city = _stable_pick(tables.cities, bundle.case_id)
        office = _stable_pick(tables.law_offices, bundle.case_id, bundle.employer_tax_id)
        return (
            f"This {bundle.document_title} is submitted by {office} in support of the "
            f"{subfield} matter under {practice_area}. It concerns {bundle.client_name}, "
            f"a {bundle.client_nationality} citizen holding {bundle.visa_type}, whose file "
            f"was opened at our {city} office on {bundle.filing_date}. The excerpt "
            f"summarizes the applicant's employment with {bundle.employer_name} and their "
            f"compliance with the terms of their current status."
        )
    raise ValueError(f"unknown fake-text mode: {mode!r}")


def render_prompt(
    task_type: str,
    bundle: EntityBundle,
    subfield: str,
    practice_area: str,
    fake_text: str,
) -> str:
    """Instantiate the task template byte-exactly. Drafting ignores fake_text;
    the other three require it to be non-empty."""
    e = bundle
    if task_type == "Summarization":
        if not fake_text:
            raise ValueError("Summarization requires fake_text")
        return (
            f"My client, {e.client_name}, a {e.client_nationality} citizen holding "
            f"{e.visa_type}, resides at {e.home_address}. This case, identified as "
            f"{e.case_id}, involves their employer, {e.employer_name} (Tax ID: "
            f"{e.employer_tax_id}), located at {e.employer_address}. Summarize the "
            f"following document submitted as part of the case:\n\nDocument Title: "
            f"{e.document_title}\n {fake_text}"
        )
    if task_type == "Translation":
        if not fake_text:
            raise ValueError("Translation requires fake_text")
        return (
            f"My client, {e.client_name}, a {e.client_nationality} citizen residing at "
            f"{e.home_address}, has submitted a {e.document_title} written in English. "
            f"Translate this document into Spanish to support their {subfield} case "
            f"under {practice_area}:\n\n {fake_text}"
        )
    if task_type == "Legal Analysis":
        if not fake_text:
            raise ValueError("Legal Analysis requires fake_text")
        return (
            f"Analyze whether {e.client_name}, a {e.client_nationality} citizen residing "
            f"at {e.home_address}, qualifies for {subfield} under {practice_area}. "
            f"Consider the following details of their case:\n\n- Filing Date: "
            f"{e.filing_date}\n- Case ID: {e.case_id}\n- Employer: {e.employer_name} "
            f"(Address: {e.employer_address})\n- Key Facts: {fake_text}"
        )
    if task_type == "Drafting":
        return (
            f"Draft a {e.document_title} for my client, {e.client_name}, a "
            f"{e.client_nationality} citizen holding {e.visa_type} and residing at "
            f"{e.home_address}. This document supports their {subfield} case under "
            f"{practice_area}. Include their employer details: {e.employer_name} "
            f"(Tax ID: {e.employer_tax_id}, Address: {e.employer_address})."
        )
    raise UnknownTaskType(task_type)


# Which label each gold-bearing bundle field carries; visa_type and
# document_title have no matching label in the closed set and stay unlabeled.
_FIELD_LABELS = (
    ("client_name", EntityLabel.PERSON),
    ("home_address", EntityLabel.ADDRESS),
    ("employer_address", EntityLabel.ADDRESS),
    ("client_nationality", EntityLabel.NATIONALITY),
    ("case_id", EntityLabel.CASE_NUMBER),
    ("employer_tax_id", EntityLabel.TAX_ID),
    ("employer_name", EntityLabel.COMPANY),
    ("filing_date", EntityLabel.DATE),
)


def scan_gold(prompt: str, bundle: EntityBundle, tables: GeneratorTables = DEFAULT_TABLES) -> list[tuple[str, EntityLabel]]:
    """Exhaustive-substring gold annotations: one (surface, label) entry per
    non-overlapping occurrence of each bundle field, plus any law-office and
    city pool surfaces embedded in the document text."""
    gold: list[tuple[str, EntityLabel]] = []
    for field_name, label in _FIELD_LABELS:
        surface = getattr(bundle, field_name)
        gold.extend([(surface, label)] * prompt.count(surface))
    for office in tables.law_offices:
        gold.extend([(office, EntityLabel.LAW_OFFICE)] * prompt.count(office))
    for city in tables.cities:
        gold.extend([(city, EntityLabel.LOCATION)] * prompt.count(city))
    return gold


def build_dataset(
    n: int,
    seed: int,
    mode: str,
    llm=None,
    tables: GeneratorTables = DEFAULT_TABLES,
) -> tuple[list[SyntheticRecord], dict]:
    """Generate n records plus a manifest describing the build."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(seed)
    records = []
    for i in range(1, n + 1):
        scenario = select_scenario(rng, tables)
        bundle = fabricate_entities(rng, tables, document_title=scenario.document_title)
        if scenario.task_type == "Drafting":
            fake_text = ""
        else:
            fake_text = generate_fake_text(
                bundle, scenario.practice_area, scenario.subfield, mode, llm=llm, tables=tables
            )
        prompt = render_prompt(
            scenario.task_type, bundle, scenario.subfield, scenario.practice_area, fake_text
        )
        gold = scan_gold(prompt, bundle, tables)
        records.append(
            SyntheticRecord(
                id=f"rec-{i:04d}",
                task_type=scenario.task_type,
                practice_area=scenario.practice_area,
                subfield=scenario.subfield,
                prompt=prompt,
                gold=gold,
                fake_text_source=mode,
            )
        )
    per_label: dict[str, int] = {}
    for record in records:
        for _, label in record.gold:
            per_label[label.name] = per_label.get(label.name, 0) + 1
    manifest = {
        "count": n,
        "seed": seed,
        "mode": mode,
        "tables_version": tables.version,
        "total_entities": sum(per_label.values()),
        "entities_per_label": dict(sorted(per_label.items())),
    }
    return records, manifest


def record_to_dict(record: SyntheticRecord) -> dict:
    return {
        "id": record.id,
        "task_type": record.task_type,
        "practice_area": record.practice_area,
        "subfield": record.subfield,
        "prompt": record.prompt,
        "gold": [{"surface": s, "label": l.name} for s, l in record.gold],
        "fake_text_source": record.fake_text_source,
    }


def record_from_dict(data: dict) -> SyntheticRecord:
    return SyntheticRecord(
        id=data["id"],
        task_type=data["task_type"],
        practice_area=data["practice_area"],
        subfield=data["subfield"],
        prompt=data["prompt"],
        gold=[(g["surface"], EntityLabel[g["label"]]) for g in data["gold"]],
        fake_text_source=data["fake_text_source"],
    )


def write_dataset(records: list[SyntheticRecord], manifest: dict, path: str | Path) -> Path:
    """Write the JSONL dataset and a manifest JSON next to it; returns the
    manifest path. Output bytes are canonical (sorted keys, fixed separators)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False,
                                sort_keys=True, separators=(",", ":")))
            fh.write("\n")
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, ensure_ascii=False, sort_keys=True, indent=2))
        fh.write("\n")
    return manifest_path


def read_dataset(path: str | Path) -> list[SyntheticRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_dict(json.loads(line)))
    return records

"""Bundled Indian agricultural-ecosystem corpus and CSV ingestion.

``build_agri_dataset`` reconstructs the demo knowledge graph from the
embedded row data below: participant roles, places, events, assets, crops
(with a minimum-support-price grouping), benefits, incomes, credit sources,
knowhow, processes, farming styles, ecosystem phenomena, budget schemes
with outlay measures, reforms, measure and metric vocabularies, relator
institutions, networks, and the seven separation kinds. Every element is
promoted step by step to the Instantiated level, every flow relationship
that needs an institution is mediated by one, and the result validates
clean under the default policy. Two builds produce byte-identical saves.

The row constants double as the membership oracle for tests: each named
item must appear as an element of its designated aspect, and the headline
sets (roles, farm types, crops, named measures) must match exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from datetime import date

from .errors import BadMapping, IoFailure, MalformedRecord, TantraError
from .model import (
    Aspect,
    Element,
    ElementId,
    Perspective,
    SchemaConfig,
    SubEcosystem,
    canonical_name,
    name_key,
    new_element,
    promote,
)
from .store import TantraGraph

SCOPE = "Indian agricultural ecosystem"

# --- embedded rows (names as modeled; duplicates kept where the source
# listing repeats an item, deduplication happens at build time) ---

WHO_ROLES_RAW = (
    "Farm-owners",
    "Farmers",
    "Tenant Farmers",
    "Farm-workers",
    "Small-Holdings Farmers",
    "Medium Farmers",
    "Large Farmers",
    "Rich Farmers",
    "Aggregators",
    "Traders",
    "Retailers",
    "Consumers",
    "PDS Beneficiaries",
    "APL/BPL Beneficiaries",
    "Money Lenders",
    "Households",
    "Consumers",
    "Buyers",
    "Sellers",
    "MSP Beneficiary",
    "APMC Farmer",
    "Contract Farmer",
    "Commission Agent",
    "APMC Trader",
)

PLACES = ("Farm Plot", "Village", "Locality", "District", "State", "Region", "Mandi")

EVENTS = (
    "Scheme Announcement",
    "Benefit Payment",
    "Procurement",
    "Land Ownership Transfer",
    "Death",
    "Migration",
)

FISCAL_YEARS = (
    ("FY 2018-19", date(2018, 4, 1), date(2019, 3, 31)),
    ("FY 2019-20", date(2019, 4, 1), date(2020, 3, 31)),
)

ASSETS = (
    "Own House",
    "Vehicle",
    "Tractor",
    "Solar Pump",
    "Land Holding",
    "Dairy",
    "Business Owned",
    "Equity",
    "Gold",
    "Farm",
    "Conventional Farm",
    "Organic Farm",
    "Leisure Farm",
    "Solar Farm",
    "Wind Farm",
)

FARM_PARENT = "Farm"
FARM_TYPES = ("Conventional Farm", "Organic Farm", "Leisure Farm", "Solar Farm", "Wind Farm")

CROPS_RAW = (
    "Rice",
    "Wheat",
    "Sugarcane",
    "Pulses",
    "Vegetables",
    "Cereals",
    "Coarse Cereals",
    "Pulses",
    "Oilseeds",
    "Commercial Crops",
    "Crops under MSP",
)

MSP_GROUP = "Crops under MSP"
MSP_MEMBERS = ("Rice", "Wheat", "Pulses", "Coarse Cereals", "Oilseeds", "Sugarcane")

BENEFITS = (
    "Input Support",
    "Price Support",
    "Income Support",
    "Insurance Support",
    "Interest Subvention",
    "Compensation",
    "Loan Waiver",
    "Fertilizer Subsidy",
    "Electricity Subsidy",
    "Water Subsidy",
    "PDS",
    "MGNREGA",
)

INCOMES = (
    "Income through Farming",
    "Income through Farm Lease",
    "Farm Labour Income",
    "Cottage Industry",
    "Animal Husbandry",
    "Non-Farm Income",
    "Money Lending",
)

CREDIT_SOURCES = (
    "Commission Agent Credit",
    "Trader Credit",
    "Bank Credit",
    "Money Lender Credit",
)

KNOWHOW = (
    "Traditional Farming Knowledge",
    "Natural Farming Knowledge",
    "Innovation Affinity",
    "Water Conservation Knowhow",
)

SUPPORT_PROCESSES = (
    "Input Support",
    "Price Support",
    "Income Support",
    "Insurance Support",
    "Interest Subvention",
    "Compensation",
    "Loan Waiver",
    "Fertilizer Subsidy",
    "Electricity Subsidy",
    "Water Subsidy",
)

FARMING_PROCESSES = (
    "Modern Farming",
    "Organic Farming",
    "Natural Farming",
    "Contract Farming",
    "APMC",
    "MSP",
    "Cooperative Farming",
)

ECOSYSTEM_PHENOMENA = ("Coevolution", "Self-organization", "Adaptation", "Emergence")

MEASURE_PARENT = "Measure"
MEASURE_NAMES = ("Yield", "Productivity", "Incomes", "Production", "Procurement", "Acreage")

ECOLOGICAL_MEASURES = ("Soil Quality", "Water Quality", "Air Pollution", "Emissions")

METRIC_NAMES = (
    "GDP Agriculture",
    "GDP per-Capita Farmer",
    "Export Share",
    "Debt Level",
    "Poverty Level",
    "Unemployment Level",
    "Profitability Level",
    "Carbon Footprint",
)

RELATORS = (
    "Banks",
    "Government Agencies",
    "PDS",
    "Insurance Firms",
    "Seed Providers",
    "Fertilizer Firms",
    "Mandi",
    "APMC",
    "NABARD",
    "Food Corporation of India",
    "Arthiya",
    "E-NAM",
)

RELATIONSHIP_KINDS = ("Tenancy", "Under Organic Farming", "Natural Farming")

NETWORKS = ("Farmer Co-operatives", "Communes", "Trader Associations", "Consumer Groups")

SEPARATION_NAMES = (
    "Informational",
    "Spatial",
    "Temporal",
    "Financial",
    "Capability",
    "Intellectual",
    "Socio-Political",
)

# Budget schemes: (name, full title, outlay 2018-19, outlay 2019-20) in crore INR.
SCHEMES = (
    ("PM-KISAN", "Pradhan Mantri Kisan Samman Yojana: minimum income support of Rs 6,000 per year to farmers", 20000.0, 75000.0),
    ("Interest Subsidy for Short-Term Credit", "Interest subvention on short-term crop loans up to the statutory limit", 14987.0, 18000.0),
    ("Pradhan Mantri Fasal Bima Yojana", "Crop-loss insurance covering yield loss, prevented sowing, and post-harvest damage", 12976.0, 14000.0),
    ("Rastriya Krishi Vikas Yojana", "Central grants to state governments for agricultural investment", 3600.0, 3745.0),
    ("Pradhan Mantri Krishi Sinchai Yojana", "Irrigation coverage expansion and water-use efficiency", 2955.0, 3500.0),
    ("Market Intervention and Price Support Scheme", "Price support for notified commodities and horticultural market intervention", 2000.0, 3000.0),
    ("National Mission for Horticulture", "Integrated horticulture development co-funded by centre and states", 2100.0, 2226.0),
    ("National Food Security Mission", "Subsidised food grains for a large share of the population", 1510.0, 2000.0),
    ("PM-AASHA", "Umbrella of price-support, price-deficiency, and private-procurement pilots", 1400.0, 1500.0),
    ("Integrated Scheme on Agricultural Marketing", "Marketing infrastructure, storage, value-chain integration, and e-marketing", 500.0, 600.0),
)

BUDGET_METRIC = "Budget Outlay"
BUDGET_UNIT = "crore-INR"

# Reforms, tagged by the sub-ecosystem they address.
REFORMS = (
    ("Organic Farming", SubEcosystem.BIOLOGICAL_NATURAL_RESOURCE),
    ("Zero-Budget Natural Farming", SubEcosystem.BIOLOGICAL_NATURAL_RESOURCE),
    ("Precision Agriculture", SubEcosystem.BIOLOGICAL_NATURAL_RESOURCE),
    ("Science and Technology Adoption", SubEcosystem.BIOLOGICAL_NATURAL_RESOURCE),
    ("Cooperative Sector Expansion", SubEcosystem.SOCIAL),
    ("Decentralized Procurement", SubEcosystem.ECONOMIC),
    ("Rural Economy Support", SubEcosystem.ECONOMIC),
    ("Agricultural Income Tax Reform", SubEcosystem.ECONOMIC),
    ("E-NAM", SubEcosystem.BUSINESS),
    ("Direct Benefit Transfer", SubEcosystem.WELFARE),
    ("Flexible Social Benefit Plan", SubEcosystem.WELFARE),
    ("Contract Farming", SubEcosystem.INDUSTRIAL),
)

WHO_SUB_ECOSYSTEM = {
    "Farm-owners": SubEcosystem.SOCIAL,
    "Farmers": SubEcosystem.SOCIAL,
    "Tenant Farmers": SubEcosystem.SOCIAL,
    "Farm-workers": SubEcosystem.SOCIAL,
    "Small-Holdings Farmers": SubEcosystem.SOCIAL,
    "Medium Farmers": SubEcosystem.SOCIAL,
    "Large Farmers": SubEcosystem.SOCIAL,
    "Rich Farmers": SubEcosystem.SOCIAL,
    "Households": SubEcosystem.SOCIAL,
    "Aggregators": SubEcosystem.BUSINESS,
    "Traders": SubEcosystem.BUSINESS,
    "Retailers": SubEcosystem.BUSINESS,
    "Consumers": SubEcosystem.BUSINESS,
    "Buyers": SubEcosystem.BUSINESS,
    "Sellers": SubEcosystem.BUSINESS,
    "Money Lenders": SubEcosystem.BUSINESS,
    "APMC Farmer": SubEcosystem.BUSINESS,
    "APMC Trader": SubEcosystem.BUSINESS,
    "Commission Agent": SubEcosystem.BUSINESS,
    "MSP Beneficiary": SubEcosystem.ECONOMIC,
    "PDS Beneficiaries": SubEcosystem.WELFARE,
    "APL/BPL Beneficiaries": SubEcosystem.WELFARE,
    "Contract Farmer": SubEcosystem.INDUSTRIAL,
}


class _Builder:
    """Deterministic element factory with per-aspect name deduplication."""

    def __init__(self, g: TantraGraph):
        self.g = g
        self.named: dict[tuple[Aspect, str], ElementId] = {}

    def id_of(self, aspect: Aspect, name: str) -> ElementId:
        return self.named[(aspect, name_key(name))]

    def add(
        self,
        aspect: Aspect,
        name: str,
        definition: str,
        *,
        group: str,
        logical_attrs: dict | None = None,
        properties: dict | None = None,
        sub_ecosystem: SubEcosystem | None = None,
    ) -> ElementId:
        key = (aspect, name_key(name))
        if key in self.named:
            return self._merge(self.named[key], properties, sub_ecosystem, group)
        e = new_element(self.g.ids, aspect, name, SCOPE)
        e = promote(e, Perspective.CONCEPTUAL, definition=definition)
        attrs = dict(logical_attrs or {})
        attrs.setdefault("group", group)
        e = promote(e, Perspective.LOGICAL, logical_attrs=attrs)
        props = dict(properties or {})
        e = promote(
            e,
            Perspective.PHYSICAL,
            schema_config=SchemaConfig.of(
                labels=(aspect.value, group),
                property_keys=tuple(sorted(props)),
            ),
        )
        e = promote(e, Perspective.INSTANTIATED, properties=props)
        if sub_ecosystem is not None:
            e = replace(e, sub_ecosystem=sub_ecosystem)
        self.g.insert_element(e)
        self.named[key] = e.id
        return e.id

    def _merge(self, eid, properties, sub_ecosystem, group) -> ElementId:
        # Re-listed item (e.g. a reform naming an existing process): merge
        # payload into the one element instead of minting a duplicate name.
        e = self.g.elements[eid]
        props = dict(e.properties)
        props.update(properties or {})
        sc = e.schema_config
        labels = set(sc.labels if sc else ()) | {group}
        keys = set(sc.property_keys if sc else ()) | set(props)
        e = replace(
            e,
            properties=props,
            schema_config=SchemaConfig.of(labels, keys),
            sub_ecosystem=sub_ecosystem or e.sub_ecosystem,
        )
        self.g.replace_element(e)
        return eid


def build_agri_dataset() -> TantraGraph:
    """Construct the bundled corpus; deterministic across builds."""
    g = TantraGraph()
    b = _Builder(g)

    for name in PLACES:
        b.add(
            Aspect.WHERE,
            name,
            f"{name}: a geographic context in which ecosystem activity is located.",
            group="Place",
        )
    village = b.id_of(Aspect.WHERE, "Village")
    mandi_place = b.id_of(Aspect.WHERE, "Mandi")

    for name in EVENTS:
        b.add(
            Aspect.WHEN,
            name,
            f"{name}: a recurring event class on the ecosystem timeline.",
            group="Event",
        )
    for name, start, end in FISCAL_YEARS:
        b.add(
            Aspect.WHEN,
            name,
            f"{name}: the budget year running {start.isoformat()} to {end.isoformat()}.",
            group="FiscalYear",
            properties={"start_date": start, "end_date": end},
        )

    for name in RELATORS:
        b.add(
            Aspect.RELATORS,
            name,
            f"{name}: an institution that enables relationships and entitlements.",
            group="Institution",
        )

    for name in ASSETS:
        b.add(
            Aspect.WHAT,
            name,
            f"{name}: an asset a household or business can hold.",
            group="Asset",
            logical_attrs={"located_at": b.id_of(Aspect.WHERE, "Farm Plot")},
        )
    farm = b.id_of(Aspect.WHAT, FARM_PARENT)
    for name in FARM_TYPES:
        g.connect("IS_A", b.id_of(Aspect.WHAT, name), farm)

    for name in _dedup(CROPS_RAW):
        b.add(
            Aspect.WHAT,
            name,
            f"{name}: a crop category cultivated in the ecosystem.",
            group="Crop",
            logical_attrs={"grown_on": farm},
        )
    msp_group = b.id_of(Aspect.WHAT, MSP_GROUP)
    for name in MSP_MEMBERS:
        g.connect("UNDER_MSP", b.id_of(Aspect.WHAT, name), msp_group)

    for name in BENEFITS:
        b.add(
            Aspect.WHAT,
            name,
            f"{name}: a benefit category delivered to ecosystem participants.",
            group="Benefit",
        )
    for name in INCOMES:
        b.add(
            Aspect.WHAT,
            name,
            f"{name}: an income stream available to rural households.",
            group="Income",
        )
    for name in CREDIT_SOURCES:
        b.add(
            Aspect.WHAT,
            name,
            f"{name}: a channel through which farm credit or debt arises.",
            group="Credit",
        )
    for name in KNOWHOW:
        b.add(
            Aspect.WHAT,
            name,
            f"{name}: a body of knowledge participants can hold and apply.",
            group="Knowhow",
            sub_ecosystem=SubEcosystem.INFORMATION,
        )

    for name in SUPPORT_PROCESSES:
        b.add(
            Aspect.HOW,
            name,
            f"{name}: a support process operated for the sector.",
            group="Process",
            logical_attrs={"delivers": b.id_of(Aspect.WHAT, name)},
        )
    for name in FARMING_PROCESSES:
        b.add(
            Aspect.HOW,
            name,
            f"{name}: a way of organizing cultivation and sale.",
            group="FarmingProcess",
        )
    for name in ECOSYSTEM_PHENOMENA:
        b.add(
            Aspect.HOW,
            name,
            f"{name}: a population-level dynamic the ecosystem can exhibit.",
            group="Phenomenon",
        )
    for name, title, *_ in SCHEMES:
        b.add(
            Aspect.HOW,
            name,
            title + ".",
            group="Scheme",
        )
    for name, eco in REFORMS:
        b.add(
            Aspect.HOW,
            name,
            f"{name}: a reform direction for the sector.",
            group="Reform",
            properties={"reform": True},
            sub_ecosystem=eco,
        )

    measure_parent = b.add(
        Aspect.WHY,
        MEASURE_PARENT,
        "Measure: the root category for quantitative observations.",
        group="MeasureVocabulary",
    )
    for name in MEASURE_NAMES:
        mid = b.add(
            Aspect.WHY,
            name,
            f"{name}: a named quantity observed about the ecosystem.",
            group="MeasureVocabulary",
        )
        g.connect("IS_A", mid, measure_parent)
    for name in ECOLOGICAL_MEASURES:
        b.add(
            Aspect.WHY,
            name,
            f"{name}: an ecological quantity tracked for sustainability.",
            group="EcologicalMeasure",
        )
    for name in METRIC_NAMES:
        b.add(
            Aspect.WHY,
            name,
            f"{name}: a sector-level metric derived from measures.",
            group="Metric",
        )

    for name in RELATIONSHIP_KINDS:
        b.add(
            Aspect.RELATIONSHIPS,
            name,
            f"{name}: a named kind of tie between participants.",
            group="Kind",
        )
    for name in NETWORKS:
        b.add(
            Aspect.RELATIONSHIPS,
            name,
            f"{name}: a participant network acting collectively.",
            group="Network",
        )

    for name in SEPARATION_NAMES:
        b.add(
            Aspect.SEPARATIONS,
            name,
            f"{name} separation: a barrier that keeps market parties apart.",
            group="SeparationKind",
        )

    for name in _dedup(WHO_ROLES_RAW):
        b.add(
            Aspect.WHO,
            name,
            f"{name}: a participant role in the ecosystem.",
            group="Role",
            logical_attrs={"located_in": village},
            sub_ecosystem=WHO_SUB_ECOSYSTEM.get(name),
            properties={"covers_apl_and_bpl": True} if name == "APL/BPL Beneficiaries" else None,
        )

    who = lambda name: b.id_of(Aspect.WHO, name)
    what = lambda name: b.id_of(Aspect.WHAT, name)
    how = lambda name: b.id_of(Aspect.HOW, name)
    relator = lambda name: b.id_of(Aspect.RELATORS, name)
    network = lambda name: b.id_of(Aspect.RELATIONSHIPS, name)

    # Produce flow: farmer -> mandi -> trader -> retailer -> consumer.
    g.connect("SELLS_AT", who("Farmers"), mandi_place, relator("APMC"))
    g.connect("SELLS_TO", who("Farmers"), who("APMC Trader"), relator("Mandi"))
    g.connect("SELLS_TO", who("APMC Trader"), who("Retailers"))
    g.connect("SELLS_TO", who("Retailers"), who("Consumers"))
    g.connect("AGGREGATES_FROM", who("Aggregators"), who("Farmers"), relator("Arthiya"))
    g.connect("SELLS_TO", who("Aggregators"), relator("Government Agencies"))
    g.connect("OFFERS_CREDIT", who("Aggregators"), who("Farmers"))
    g.connect("LENDS_TO", who("Money Lenders"), who("Farmers"))

    # Institutional support.
    g.connect("FINANCED_BY", who("Farmers"), relator("Banks"), relator("NABARD"))
    g.connect("INSURED_BY", who("Farmers"), how("Pradhan Mantri Fasal Bima Yojana"), relator("Insurance Firms"))
    g.connect("RECEIVES_BENEFIT", who("Farmers"), what("Income Support"), relator("Government Agencies"))
    g.connect("RECEIVES_BENEFIT", who("PDS Beneficiaries"), what("PDS"), relator("PDS"))
    g.connect("RECEIVES_BENEFIT", who("MSP Beneficiary"), what("Price Support"), relator("Food Corporation of India"))

    # Information, capability, and affiliation ties.
    g.connect("INFORMED_BY", who("Farmers"), relator("E-NAM"))
    g.connect("TRADES_ON", who("Traders"), relator("E-NAM"))
    g.connect("SERVED_BY", who("Farmers"), mandi_place)
    g.connect("HAS_KNOWHOW", who("Farmers"), what("Traditional Farming Knowledge"))
    g.connect("MEMBER_OF", who("Farmers"), network("Farmer Co-operatives"))
    g.connect("MEMBER_OF", who("Traders"), network("Trader Associations"))
    g.connect("MEMBER_OF", who("Consumers"), network("Consumer Groups"))
    g.connect("TENANT_OF", who("Tenant Farmers"), who("Farm-owners"))
    g.connect("PRACTICES", who("Farmers"), how("Modern Farming"))
    g.connect("PRACTICES", who("Contract Farmer"), how("Contract Farming"))

    # Which schemes deliver which benefit categories.
    for scheme, benefit in (
        ("PM-KISAN", "Income Support"),
        ("Interest Subsidy for Short-Term Credit", "Interest Subvention"),
        ("Pradhan Mantri Fasal Bima Yojana", "Insurance Support"),
        ("Market Intervention and Price Support Scheme", "Price Support"),
    ):
        g.connect("DELIVERS", how(scheme), what(benefit))

    # The documented separations bear on farmers.
    for name in SEPARATION_NAMES:
        g.connect("AFFECTS", b.id_of(Aspect.SEPARATIONS, name), who("Farmers"))

    # Budget outlays per scheme and fiscal year.
    fy = {name: b.id_of(Aspect.WHEN, name) for name, *_ in FISCAL_YEARS}
    for name, _, outlay_1819, outlay_1920 in SCHEMES:
        g.attach_measure(how(name), BUDGET_METRIC, outlay_1819, BUDGET_UNIT, fy["FY 2018-19"])
        g.attach_measure(how(name), BUDGET_METRIC, outlay_1920, BUDGET_UNIT, fy["FY 2019-20"])

    return g


def _dedup(items) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for raw in items:
        key = name_key(raw)
        if key not in seen:
            seen.add(key)
            out.append(canonical_name(raw))
    return out


def who_roles() -> list[str]:
    """The deduplicated role list the dataset must reproduce exactly."""
    return _dedup(WHO_ROLES_RAW)


def crop_names() -> list[str]:
    return _dedup(CROPS_RAW)


# --- CSV ingestion ---


@dataclass(frozen=True)
class ElementTemplate:
    aspect: Aspect
    name_column: str
    scope: str = SCOPE
    definition_column: str | None = None
    property_columns: tuple[str, ...] = ()

    def columns(self) -> set[str]:
        cols = {self.name_column, *self.property_columns}
        if self.definition_column:
            cols.add(self.definition_column)
        return cols


@dataclass(frozen=True)
class RelationshipTemplate:
    rel_type: str
    source_column: str
    target_column: str
    relator_column: str | None = None

    def columns(self) -> set[str]:
        cols = {self.source_column, self.target_column}
        if self.relator_column:
            cols.add(self.relator_column)
        return cols


@dataclass(frozen=True)
class MeasureTemplate:
    metric_name: str
    value_column: str
    unit: str
    subject_column: str
    event_column: str | None = None

    def columns(self) -> set[str]:
        cols = {self.value_column, self.subject_column}
        if self.event_column:
            cols.add(self.event_column)
        return cols


@dataclass(frozen=True)
class IngestMapping:
    elements: tuple[ElementTemplate, ...] = ()
    relationships: tuple[RelationshipTemplate, ...] = ()
    measures: tuple[MeasureTemplate, ...] = ()

    def columns(self) -> set[str]:
        cols: set[str] = set()
        for t in (*self.elements, *self.relationships, *self.measures):
            cols |= t.columns()
        return cols


@dataclass(frozen=True)
class IngestResult:
    inserted: int
    skipped: int
    violations: tuple[str, ...]


def ingest_csv(g: TantraGraph, path, mapping: IngestMapping) -> IngestResult:
    """Apply the mapping row by row; bad rows are skipped with a reason."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise BadMapping("source file has no header row")
            header = set(reader.fieldnames)
            missing = mapping.columns() - header
            if missing:
                raise BadMapping(f"mapping references absent columns: {sorted(missing)}")
            rows = list(reader)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    inserted = 0
    skipped = 0
    violations: list[str] = []

    def resolve(name: str, row_no: int, role: str, aspect: Aspect | None = None):
        hits = g.find_by_name(name, aspect)
        if len(hits) == 1:
            return hits[0].id
        reason = "unknown" if not hits else "ambiguous"
        violations.append(f"row {row_no}: {reason} {role} {name!r}")
        return None

    for row_no, row in enumerate(rows, start=2):
        row_ok = True
        for t in mapping.elements:
            name = canonical_name(row[t.name_column] or "")
            if not name:
                row_ok = False
                violations.append(f"row {row_no}: empty name in {t.name_column!r}")
                continue
            if g.find_by_name(name, t.aspect):
                row_ok = False
                violations.append(
                    f"row {row_no}: duplicate {t.aspect.value} name {name!r}"
                )
                continue
            e = new_element(g.ids, t.aspect, name, t.scope)
            if t.definition_column:
                definition = (row[t.definition_column] or "").strip()
                if definition:
                    e = promote(e, Perspective.CONCEPTUAL, definition=definition)
            props = {c: row[c] for c in t.property_columns if row[c]}
            if props:
                e = replace(e, properties=props)
            g.insert_element(e)
            inserted += 1
        for t in mapping.relationships:
            src = resolve(row[t.source_column], row_no, "source")
            dst = resolve(row[t.target_column], row_no, "target")
            rel = None
            if t.relator_column:
                rel = resolve(row[t.relator_column], row_no, "relator", Aspect.RELATORS)
                if rel is None:
                    row_ok = False
                    continue
            if src is None or dst is None:
                row_ok = False
                continue
            g.connect(t.rel_type, src, dst, rel)
            inserted += 1
        for t in mapping.measures:
            subject = resolve(row[t.subject_column], row_no, "subject")
            if subject is None:
                row_ok = False
                continue
            try:
                value = float(row[t.value_column])
            except (TypeError, ValueError):
                row_ok = False
                violations.append(
                    f"row {row_no}: non-numeric value {row[t.value_column]!r} "
                    f"for {t.metric_name!r}"
                )
                continue
            event = None
            if t.event_column and row[t.event_column]:
                event = resolve(row[t.event_column], row_no, "event", Aspect.WHEN)
                if event is None:
                    row_ok = False
                    continue
            g.attach_measure(subject, t.metric_name, value, t.unit, event)
            inserted += 1
        if not row_ok:
            skipped += 1
    return IngestResult(inserted, skipped, tuple(violations))


def ingest_jsonl(g: TantraGraph, path) -> IngestResult:
    """Ingest element/relationship/measure records in the persistence format.

    Unlike a full load this appends into an existing graph; records that
    collide or dangle are skipped with a reason instead of failing the run.
    """
    from .store import _element_from, _measure_from, _parse_line, _relationship_from

    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    inserted = 0
    skipped = 0
    violations: list[str] = []
    for n, line in enumerate(lines, start=1):
        rec = _parse_line(line, n)
        kind = rec.get("rec")
        if kind is None and rec.get("format"):
            continue  # tolerate a leading header line
        try:
            if kind == "element":
                g.insert_element(_element_from(rec))
            elif kind == "relationship":
                g.insert_relationship(_relationship_from(rec))
            elif kind == "measure":
                g.insert_measure(_measure_from(rec))
            else:
                raise MalformedRecord(n, f"unknown record kind {kind!r}")
        except MalformedRecord:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(n, f"bad {kind} record: {exc}") from exc
        except TantraError as exc:
            skipped += 1
            violations.append(f"line {n}: {exc}")
            continue
        inserted += 1
    return IngestResult(inserted, skipped, tuple(violations))


def mapping_to_jsonl(mapping: IngestMapping) -> str:
    lines = [json.dumps({"format": "tantra-mapping", "version": 1}, sort_keys=True, separators=(",", ":"))]
    for t in mapping.elements:
        lines.append(
            json.dumps(
                {
                    "rec": "element",
                    "aspect": t.aspect.value,
                    "name_column": t.name_column,
                    "scope": t.scope,
                    "definition_column": t.definition_column,
                    "property_columns": list(t.property_columns),
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    for t in mapping.relationships:
        lines.append(
            json.dumps(
                {
                    "rec": "relationship",
                    "rel_type": t.rel_type,
                    "source_column": t.source_column,
                    "target_column": t.target_column,
                    "relator_column": t.relator_column,
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    for t in mapping.measures:
        lines.append(
            json.dumps(
                {
                    "rec": "measure",
                    "metric_name": t.metric_name,
                    "value_column": t.value_column,
                    "unit": t.unit,
                    "subject_column": t.subject_column,
                    "event_column": t.event_column,
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + "\n"


def load_mapping(path) -> IngestMapping:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise MalformedRecord(1, "empty mapping file")
    header = json.loads(lines[0])
    if header.get("format") != "tantra-mapping":
        raise MalformedRecord(1, f"unexpected format {header.get('format')!r}")
    elements: list[ElementTemplate] = []
    relationships: list[RelationshipTemplate] = []
    measures: list[MeasureTemplate] = []
    for n, line in enumerate(lines[1:], start=2):
        rec = json.loads(line)
        kind = rec.get("rec")
        try:
            if kind == "element":
                elements.append(
                    ElementTemplate(
                        aspect=Aspect(rec["aspect"]),
                        name_column=rec["name_column"],
                        scope=rec.get("scope", SCOPE),
                        definition_column=rec.get("definition_column"),
                        property_columns=tuple(rec.get("property_columns", ())),
                    )
                )
            elif kind == "relationship":
                relationships.append(
                    RelationshipTemplate(
                        rel_type=rec["rel_type"],
                        source_column=rec["source_column"],
                        target_column=rec["target_column"],
                        relator_column=rec.get("relator_column"),
                    )
                )
            elif kind == "measure":
                measures.append(
                    MeasureTemplate(
                        metric_name=rec["metric_name"],
                        value_column=rec["value_column"],
                        unit=rec["unit"],
                        subject_column=rec["subject_column"],
                        event_column=rec.get("event_column"),
                    )
                )
            else:
                raise MalformedRecord(n, f"unknown record kind {kind!r}")
        except (KeyError, ValueError) as exc:
            raise BadMapping(f"line {n}: {exc}") from exc
    return IngestMapping(tuple(elements), tuple(relationships), tuple(measures))

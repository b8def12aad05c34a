"""Flat key = value experiment configs with sections, parsed fail-closed.

The format is diff-friendly plain text:

    [lattice]
    n_sites = 256
    lattice_const = 0.5e-6
    fill_factor = 0.10

    [model]
    kind = bunched
    seed_mode = fixed
    seed_site = 128

Unknown sections or keys are rejected with the offending line number, as are
keys that do not apply to the selected model kind. Every randomized quantity
flows from run.master_seed; when it is omitted a seed is drawn from OS
entropy once and recorded in the resolved config so outputs stay replayable.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .constants import (DEFAULT_BUNCHED_TAU_SITES, DEFAULT_LATTICE_CONST,
                        DEFAULT_PACKET_WIDTH, SPECIES_MASS)
from .ensemble import DEFAULT_OUTPUTS, ALL_OUTPUTS, ExperimentConfig
from .lattice import (AntiBunchedModel, BunchedModel, LatticeConfig,
                      RandomModel, SeedMode, Statistics, SuperLatticeModel)
from .streams import fresh_seed
from .wavepacket import DoubleWellState, ExpansionParams


class ConfigError(ValueError):
    """Malformed or out-of-range experiment configuration."""


_SCHEMA = {
    "lattice": {"n_sites", "lattice_const", "fill_factor", "statistics"},
    "model": {"kind", "tau", "seed_mode", "seed_site", "min_gap", "period",
              "envelope_width"},
    "expansion": {"species", "mass", "flight_time"},
    "run": {"runs", "master_seed", "workers"},
    "outputs": {"products", "p1_panel", "p2_panel"},
    "doublewell": {"c1", "c2", "phi", "well_separation", "packet_width"},
}

_MODEL_KEYS = {
    "random": set(),
    "bunched": {"tau", "seed_mode", "seed_site"},
    "antibunched": {"min_gap"},
    "superlattice": {"period", "envelope_width"},
}


def parse_sections(text: str) -> Dict[str, Dict[str, Tuple[str, int]]]:
    """Raw parse: {section: {key: (value string, line number)}}."""
    sections: Dict[str, Dict[str, Tuple[str, int]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SCHEMA:
                raise ConfigError(f"unknown section '{current}' (line {lineno})")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value (line {lineno}): {raw!r}")
        if current is None:
            raise ConfigError(f"key outside any section (line {lineno})")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA[current]:
            raise ConfigError(
                f"unknown key '{current}.{key}' (line {lineno})")
        if key in sections[current]:
            raise ConfigError(
                f"duplicate key '{current}.{key}' (line {lineno})")
        sections[current][key] = (value, lineno)
    return sections


class _Section:
    """Typed accessors over one parsed section, with line-aware errors."""

    def __init__(self, name, data):
        self.name = name
        self.data = dict(data)

    def _take(self, key, required):
        if key not in self.data:
            if required:
                raise ConfigError(f"missing required key '{self.name}.{key}'")
            return None, None
        return self.data.pop(key)

    def _convert(self, key, caster, kind_name, required=False, default=None):
        value, lineno = self._take(key, required)
        if value is None:
            return default
        try:
            return caster(value)
        except (ValueError, KeyError):
            raise ConfigError(
                f"invalid {kind_name} for '{self.name}.{key}' "
                f"(line {lineno}): {value!r}") from None

    def integer(self, key, required=False, default=None):
        return self._convert(key, lambda s: int(s, 0), "integer", required,
                             default)

    def number(self, key, required=False, default=None):
        return self._convert(key, float, "number", required, default)

    def string(self, key, required=False, default=None):
        return self._convert(key, str, "string", required, default)

    def choice(self, key, options, required=False, default=None):
        def cast(s):
            s = s.lower()
            if s not in options:
                raise ValueError(s)
            return s
        return self._convert(key, cast, f"choice {sorted(options)}", required,
                             default)

    def reject_leftovers(self):
        for key, (_, lineno) in self.data.items():
            raise ConfigError(
                f"key '{self.name}.{key}' does not apply here (line {lineno})")


def _section(sections, name) -> _Section:
    if name not in sections:
        raise ConfigError(f"missing required section [{name}]")
    return _Section(name, sections[name])


def _build_model(sections, fill):
    sec = _section(sections, "model")
    kind = sec.choice("kind", set(_MODEL_KEYS), required=True)
    allowed = _MODEL_KEYS[kind]
    for key in set(sec.data) - allowed:
        _, lineno = sec.data[key]
        raise ConfigError(
            f"key 'model.{key}' does not apply to kind '{kind}' "
            f"(line {lineno})")
    resolved = {"kind": kind}
    try:
        if kind == "random":
            model = RandomModel(target_fill=fill)
        elif kind == "bunched":
            tau = sec.number("tau")   # None defers to the lattice-scaled default
            seed_mode = sec.choice("seed_mode", {"fixed", "random"},
                                   default="fixed")
            seed_site = sec.integer("seed_site")
            mode = SeedMode.FIXED if seed_mode == "fixed" \
                else SeedMode.RANDOM_UNIFORM
            model = ("bunched-pending", tau, mode, seed_site)
        elif kind == "antibunched":
            model = AntiBunchedModel(target_fill=fill,
                                     min_gap=sec.integer("min_gap",
                                                         required=True))
            resolved["min_gap"] = model.min_gap
        else:
            model = SuperLatticeModel(
                target_fill=fill,
                period=sec.integer("period", required=True),
                envelope_width=sec.number("envelope_width", required=True))
            resolved["period"] = model.period
            resolved["envelope_width"] = model.envelope_width
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    sec.reject_leftovers()
    return model, resolved


def _build_expansion(sections):
    sec = _section(sections, "expansion")
    species = sec.choice("species", set(SPECIES_MASS), default=None)
    mass = sec.number("mass")
    if species is not None and mass is not None:
        raise ConfigError("give either expansion.species or expansion.mass, "
                          "not both")
    if species is not None:
        mass = SPECIES_MASS[species]
    if mass is None:
        raise ConfigError("missing required key 'expansion.mass' "
                          "(or expansion.species)")
    flight_time = sec.number("flight_time", required=True)
    sec.reject_leftovers()
    try:
        return ExpansionParams.from_time(mass=mass, flight_time=flight_time)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class LoadedExperiment:
    config: ExperimentConfig
    resolved: Dict[str, object]       # flat, fully defaulted, seed included
    p1_panel: str
    p2_panel: str


def load_experiment_config(path, seed_override: Optional[int] = None,
                           runs_override: Optional[int] = None
                           ) -> LoadedExperiment:
    """Parse, validate, and fully resolve an experiment config file."""
    with open(path, "r", encoding="utf-8") as fh:
        sections = parse_sections(fh.read())

    sec = _section(sections, "lattice")
    try:
        lattice = LatticeConfig(
            n_sites=sec.integer("n_sites", required=True),
            lattice_const=sec.number("lattice_const", required=True),
            fill_factor=sec.number("fill_factor", required=True),
            statistics=Statistics(sec.choice("statistics",
                                             {"boson", "fermion"},
                                             default="boson")))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    sec.reject_leftovers()

    model, model_resolved = _build_model(sections, lattice.fill_factor)
    if isinstance(model, tuple):  # bunched needs the lattice constant
        _, tau, mode, seed_site = model
        if tau is None:
            tau = DEFAULT_BUNCHED_TAU_SITES * lattice.lattice_const
        try:
            model = BunchedModel(target_fill=lattice.fill_factor, tau=tau,
                                 seed_mode=mode, seed_site=seed_site)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        model_resolved.update(tau=model.tau, seed_mode=model.seed_mode.value,
                              seed_site=model.seed_site)

    expansion = _build_expansion(sections)

    run_sec = _Section("run", sections.get("run", {}))
    runs = run_sec.integer("runs", default=500)
    master_seed = run_sec.integer("master_seed", default=None)
    workers = run_sec.integer("workers", default=1)
    run_sec.reject_leftovers()
    if runs_override is not None:
        runs = runs_override
    if seed_override is not None:
        master_seed = seed_override
    seed_from_entropy = master_seed is None
    if seed_from_entropy:
        master_seed = fresh_seed()

    out_sec = _Section("outputs", sections.get("outputs", {}))
    products_raw = out_sec.string("products", default=None)
    if products_raw is None:
        products = DEFAULT_OUTPUTS
    else:
        products = frozenset(p.strip() for p in products_raw.split(",")
                             if p.strip())
        unknown = products - ALL_OUTPUTS
        if unknown:
            raise ConfigError(f"unknown output products: {sorted(unknown)}")
    p1_panel = out_sec.string("p1_panel", default="p1")
    p2_panel = out_sec.string("p2_panel", default="p2")
    out_sec.reject_leftovers()

    try:
        config = ExperimentConfig(lattice=lattice, model=model,
                                  expansion=expansion, runs=runs,
                                  master_seed=master_seed, outputs=products,
                                  workers=workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    resolved = {
        "lattice.n_sites": lattice.n_sites,
        "lattice.lattice_const": lattice.lattice_const,
        "lattice.fill_factor": lattice.fill_factor,
        "lattice.statistics": lattice.statistics.value,
        "expansion.mass": expansion.mass,
        "expansion.flight_time": expansion.flight_time,
        "expansion.l_squared": expansion.l_squared,
        "run.runs": runs,
        "run.master_seed": master_seed,
        "run.master_seed_from_entropy": seed_from_entropy,
        "run.workers": workers,
        "outputs.products": ",".join(sorted(products)),
    }
    resolved.update({f"model.{k}": v for k, v in model_resolved.items()})
    return LoadedExperiment(config=config, resolved=resolved,
                            p1_panel=p1_panel, p2_panel=p2_panel)


def load_doublewell_config(path):
    """Read [doublewell] (and [expansion] if present) from a config file.

    Returns (DoubleWellState, ExpansionParams or None). Missing state keys
    fall back to a balanced superposition in a 0.2 um double well.
    """
    with open(path, "r", encoding="utf-8") as fh:
        sections = parse_sections(fh.read())
    sec = _Section("doublewell", sections.get("doublewell", {}))
    c1 = sec.number("c1", default=2 ** -0.5)
    c2 = sec.number("c2", default=2 ** -0.5)
    phi = sec.number("phi", default=0.0)
    well_separation = sec.number("well_separation", default=0.2e-6)
    packet_width = sec.number("packet_width", default=DEFAULT_PACKET_WIDTH)
    sec.reject_leftovers()
    expansion = _build_expansion(sections) if "expansion" in sections else None
    try:
        state = DoubleWellState(c1=c1, c2=c2, phi=phi,
                                well_separation=well_separation,
                                packet_width=packet_width)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return state, expansion


def load_geometry_overrides(path):
    """Read lattice_const and packet width for the resolution command."""
    lattice_const = DEFAULT_LATTICE_CONST
    packet_width = DEFAULT_PACKET_WIDTH
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            sections = parse_sections(fh.read())
        if "lattice" in sections:
            sec = _Section("lattice", sections["lattice"])
            lattice_const = sec.number("lattice_const",
                                       default=DEFAULT_LATTICE_CONST)
            sec.data.clear()
        if "doublewell" in sections:
            sec = _Section("doublewell", sections["doublewell"])
            packet_width = sec.number("packet_width",
                                      default=DEFAULT_PACKET_WIDTH)
            sec.data.clear()
    return lattice_const, packet_width

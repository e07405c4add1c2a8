"""Service configuration: one YAML/JSON file plus environment overrides.

Environment variables (all optional) override file values:

    PMCTL_DATA_DIR, PMCTL_HOST, PMCTL_PORT, PMCTL_RULES_FILE,
    PMCTL_WARN_RATIO, PMCTL_CRITICAL_RATIO, PMCTL_TYPICALITY_CV
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import yaml

from .diagnostics import CorrectiveAction, DEFAULT_ACTIONS, Thresholds, load_actions_doc
from .errors import ConfigInvalid, ValidationFailed
from .lifecycle import ROLES, EventKind

# Which roles may submit which lifecycle events, read off the actor
# responsibilities of the business process.  Fully overridable in config.
DEFAULT_ROLE_MAP: dict[EventKind, frozenset[str]] = {
    EventKind.OPPORTUNITY_QUALIFIED: frozenset({"business_engineer"}),
    EventKind.PROPOSAL_READY: frozenset({"before_sale_engineer"}),
    EventKind.DECISION_BID_NO_BID: frozenset({"business_manager"}),
    EventKind.DECISION_WIN_LOSS: frozenset({"business_manager"}),
    EventKind.CONTRACT_SIGNED: frozenset({"legal_support", "customer"}),
    EventKind.PLAN_ESTABLISHED: frozenset({"project_manager", "architect"}),
    EventKind.TASKS_COMPLETED: frozenset({"project_manager", "team_member"}),
    EventKind.TESTS_PASSED: frozenset({"project_manager"}),
    EventKind.DELIVERED_TO_CUSTOMER: frozenset({"project_manager"}),
    EventKind.CONTRACT_CLOSED: frozenset({"legal_support"}),
}


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: Path = Path("./pmcontrols-data")
    host: str = "127.0.0.1"
    port: int = 8420
    thresholds: Thresholds = field(default_factory=Thresholds)
    role_map: Mapping[EventKind, frozenset[str]] = field(
        default_factory=lambda: dict(DEFAULT_ROLE_MAP)
    )
    actions: tuple[CorrectiveAction, ...] = DEFAULT_ACTIONS

    def roles_for(self, kind: EventKind) -> frozenset[str]:
        return self.role_map.get(kind, frozenset())


def _read_doc(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config file {path}: {exc}")
    try:
        if path.suffix == ".json":
            return json.loads(text)
        return yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigInvalid(f"cannot parse config file {path}: {exc}")


def _parse_role_map(raw, base: Path) -> dict[EventKind, frozenset[str]]:
    if not isinstance(raw, dict):
        raise ConfigInvalid("role_map must map event kinds to role lists")
    role_map = dict(DEFAULT_ROLE_MAP)
    for raw_kind, raw_roles in raw.items():
        try:
            kind = EventKind(raw_kind)
        except ValueError:
            raise ConfigInvalid(f"role_map: unknown event kind {raw_kind!r}")
        if not isinstance(raw_roles, list) or not all(isinstance(r, str) for r in raw_roles):
            raise ConfigInvalid(f"role_map.{raw_kind}: must be a list of role names")
        for role in raw_roles:
            if role not in ROLES:
                raise ConfigInvalid(
                    f"role_map.{raw_kind}: unknown role {role!r} (known: {', '.join(ROLES)})"
                )
        role_map[kind] = frozenset(raw_roles)
    return role_map


def _float_field(doc: dict, env: Mapping[str, str], key: str, env_name: str, default: float) -> float:
    raw = env.get(env_name, doc.get(key, default))
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"{key}: expected a number, got {raw!r}")


def load_config(
    path: str | Path | None = None, env: Optional[Mapping[str, str]] = None
) -> ServiceConfig:
    """Build the effective configuration from defaults, file and environment."""
    env = os.environ if env is None else env
    doc = {}
    base = Path(".")
    if path is not None:
        path = Path(path)
        base = path.parent
        loaded = _read_doc(path)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigInvalid("config file must contain a mapping at the top level")
        doc = loaded

    unknown = set(doc) - {
        "data_dir", "host", "port", "warn_ratio", "critical_ratio",
        "typicality_cv", "role_map", "rules_file",
    }
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {', '.join(sorted(unknown))}")

    data_dir = Path(env.get("PMCTL_DATA_DIR", doc.get("data_dir", "./pmcontrols-data")))
    host = env.get("PMCTL_HOST", doc.get("host", "127.0.0.1"))
    if not isinstance(host, str) or not host:
        raise ConfigInvalid(f"host: expected a non-empty string, got {host!r}")
    raw_port = env.get("PMCTL_PORT", doc.get("port", 8420))
    try:
        port = int(raw_port)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"port: expected an integer, got {raw_port!r}")
    if not (0 < port < 65536):
        raise ConfigInvalid(f"port: out of range: {port}")

    try:
        thresholds = Thresholds(
            warn_ratio=_float_field(doc, env, "warn_ratio", "PMCTL_WARN_RATIO", 0.05),
            critical_ratio=_float_field(doc, env, "critical_ratio", "PMCTL_CRITICAL_RATIO", 0.10),
            typicality_cv=_float_field(doc, env, "typicality_cv", "PMCTL_TYPICALITY_CV", 0.10),
        )
    except ValidationFailed as exc:
        raise ConfigInvalid(str(exc))

    role_map = dict(DEFAULT_ROLE_MAP)
    if "role_map" in doc:
        role_map = _parse_role_map(doc["role_map"], base)

    actions = DEFAULT_ACTIONS
    rules_file = env.get("PMCTL_RULES_FILE", doc.get("rules_file"))
    if rules_file:
        rules_path = Path(rules_file)
        if not rules_path.is_absolute():
            rules_path = base / rules_path
        rules_doc = _read_doc(rules_path)
        try:
            actions = load_actions_doc(rules_doc)
        except ValidationFailed as exc:
            raise ConfigInvalid(f"rules file {rules_path}: {exc}")

    return ServiceConfig(
        data_dir=data_dir,
        host=host,
        port=port,
        thresholds=thresholds,
        role_map=role_map,
        actions=actions,
    )

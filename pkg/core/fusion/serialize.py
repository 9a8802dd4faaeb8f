"""JSON persistence of fitted models."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from core.errors import InvalidInput
from core.fusion.hybrid import HybridModel
from core.fusion.sections import SectionedModel, SectioningMode, SectionPartition
from core.model.dataset import AXES
from core.penalty.loader import parse_penalty
from core.simplex.projection import CoefficientVector

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

Model = Union[HybridModel, SectionedModel]


def _hybrid_to_dict(model: HybridModel) -> Dict[str, Any]:
    return {
        "alpha": {axis: model.per_axis_alpha[axis].as_list() for axis in AXES},
        "flags": list(model.flags),
    }


def model_to_dict(model: Model) -> Dict[str, Any]:
    """Plain-data form of a hybrid or sectioned model."""
    if isinstance(model, SectionedModel):
        base = model.global_model
        return {
            "version": FORMAT_VERSION,
            "kind": "sectioned",
            "technologies": list(base.technologies),
            "penalty": base.penalty.spec,
            "mode": model.sectioning_mode.value,
            "partition": {"axis": model.partition.axis, "boundaries": list(model.partition.boundaries)},
            "global": _hybrid_to_dict(base),
            "sections": [_hybrid_to_dict(m) for m in model.per_section_models],
            "section_sizes": list(model.section_sizes),
            "flags": list(model.flags),
        }
    return {
        "version": FORMAT_VERSION,
        "kind": "hybrid",
        "technologies": list(model.technologies),
        "penalty": model.penalty.spec,
        "global": _hybrid_to_dict(model),
        "flags": list(model.flags),
    }


def _hybrid_from_dict(data: Dict[str, Any], technologies, penalty) -> HybridModel:
    alphas = {axis: CoefficientVector(data["alpha"][axis]) for axis in AXES}
    return HybridModel(tuple(technologies), penalty, alphas, tuple(data.get("flags", ())))


def model_from_dict(data: Dict[str, Any]) -> Model:
    """Inverse of :func:`model_to_dict`.

    Raises:
        InvalidInput: On an unknown kind or missing fields
    """
    try:
        technologies = data["technologies"]
        penalty = parse_penalty(data["penalty"])
        global_model = _hybrid_from_dict(data["global"], technologies, penalty)
        kind = data.get("kind", "hybrid")
        if kind == "hybrid":
            return global_model
        if kind != "sectioned":
            raise InvalidInput(f"Unknown model kind {kind!r}")
        partition = SectionPartition(tuple(data["partition"]["boundaries"]), data["partition"].get("axis", "x"))
        sections = tuple(_hybrid_from_dict(s, technologies, penalty) for s in data["sections"])
        return SectionedModel(
            partition,
            global_model,
            sections,
            SectioningMode(data["mode"]),
            tuple(data.get("section_sizes", ())),
            tuple(data.get("flags", ())),
        )
    except KeyError as e:
        raise InvalidInput(f"Model file is missing field {e}") from None
    except ValueError as e:
        raise InvalidInput(f"Model file is invalid: {e}") from None


def save_model(model: Model, path: str) -> None:
    """Write a model as JSON.

    Raises:
        IOError: If the file cannot be written
    """
    out = Path(path)
    try:
        with open(out, "w", encoding="utf-8") as f:
            json.dump(model_to_dict(model), f, indent=2)
            f.write("\n")
        logger.info(f"Model written to {out}")
    except IOError as e:
        logger.error(f"Failed to write model {out}: {e}")
        raise


def load_model(path: str) -> Model:
    """Read a model written by :func:`save_model`.

    Raises:
        InvalidInput: If the file is not valid model JSON
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InvalidInput(f"{path} is not valid JSON: {e}") from None
    return model_from_dict(data)

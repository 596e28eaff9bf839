"""
Model checkpoints.

A checkpoint is an ``.npz`` archive. The entry ``__header__`` holds a YAML
document describing the model as a tree of dataclasses, lists, dicts, enums and
scalars; every array (and every float, stored 0-d for exact round trips) lives
in its own entry ``a<N>`` in C order. Loading never unpickles: only the classes
listed in ``CHECKPOINT_CLASSES`` can be rebuilt.
"""

from __future__ import annotations

import dataclasses
import io
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import yaml

from src.anoscope.deep.autoencoder import AEModel
from src.anoscope.deep.deep_svdd import DeepSVDDModel, DeepSVDDVariant
from src.anoscope.deep.mlp import MLP, Activation, Layer
from src.anoscope.errors import InvalidConfig, MissingFile
from src.anoscope.kernels import KernelKind, KernelSpec
from src.anoscope.models.base import BaseDetector
from src.anoscope.models.gaussian import GaussianModel
from src.anoscope.models.gmm import GMMModel, GMMScoring
from src.anoscope.models.kde import KDEModel
from src.anoscope.models.kpca import KPCAModel
from src.anoscope.models.mve import MVEModel
from src.anoscope.models.ocsvm import OCSVMModel
from src.anoscope.models.pca import PCAModel
from src.anoscope.models.ppca import PPCAModel
from src.anoscope.models.svdd import SVDDModel
from src.anoscope.models.vq import VQModel, VQNorm
from src.utils.logging import get_logger

logger = get_logger(__name__)

FORMAT_NAME = "anoscope-checkpoint"
FORMAT_VERSION = 1
HEADER_KEY = "__header__"

MODEL_CLASSES = {
    cls.__name__: cls
    for cls in (
        GaussianModel,
        GMMModel,
        KDEModel,
        PPCAModel,
        MVEModel,
        SVDDModel,
        OCSVMModel,
        PCAModel,
        KPCAModel,
        VQModel,
        AEModel,
        DeepSVDDModel,
    )
}
CHECKPOINT_CLASSES = {**MODEL_CLASSES, "KernelSpec": KernelSpec, "MLP": MLP, "Layer": Layer}
ENUM_CLASSES = {cls.__name__: cls for cls in (KernelKind, GMMScoring, VQNorm, DeepSVDDVariant, Activation)}


class _Encoder:
    def __init__(self):
        self.arrays: Dict[str, np.ndarray] = {}

    def _store(self, array: np.ndarray) -> str:
        name = f"a{len(self.arrays)}"
        self.arrays[name] = np.ascontiguousarray(array)
        return name

    def encode(self, value: Any) -> Any:
        if isinstance(value, Enum):
            return {"enum": type(value).__name__, "value": value.value}
        if isinstance(value, (bool, np.bool_)):
            return {"value": bool(value)}
        if isinstance(value, (int, np.integer)):
            return {"value": int(value)}
        if isinstance(value, (float, np.floating)):
            return {"float": self._store(np.asarray(value, dtype=np.float64))}
        if value is None or isinstance(value, str):
            return {"value": value}
        if isinstance(value, np.ndarray):
            return {"array": self._store(value)}
        if dataclasses.is_dataclass(value):
            name = type(value).__name__
            if name not in CHECKPOINT_CLASSES:
                raise InvalidConfig(f"cannot checkpoint objects of type {name}")
            return {
                "dataclass": name,
                "fields": {f.name: self.encode(getattr(value, f.name)) for f in dataclasses.fields(value)},
            }
        if isinstance(value, (list, tuple)):
            return {"list": [self.encode(item) for item in value]}
        if isinstance(value, dict):
            return {"dict": {str(k): self.encode(v) for k, v in value.items()}}
        raise InvalidConfig(f"cannot checkpoint value of type {type(value).__name__}")


def _decode(node: Dict[str, Any], arrays) -> Any:
    if "array" in node:
        return arrays[node["array"]]
    if "float" in node:
        return float(arrays[node["float"]])
    if "value" in node and "enum" not in node:
        return node["value"]
    if "enum" in node:
        if node["enum"] not in ENUM_CLASSES:
            raise InvalidConfig(f"unknown enum {node['enum']!r} in checkpoint")
        return ENUM_CLASSES[node["enum"]](node["value"])
    if "list" in node:
        return [_decode(item, arrays) for item in node["list"]]
    if "dict" in node:
        return {k: _decode(v, arrays) for k, v in node["dict"].items()}
    if "dataclass" in node:
        name = node["dataclass"]
        if name not in CHECKPOINT_CLASSES:
            raise InvalidConfig(f"unknown class {name!r} in checkpoint")
        cls = CHECKPOINT_CLASSES[name]
        obj = cls.__new__(cls)
        for field_name, child in node["fields"].items():
            object.__setattr__(obj, field_name, _decode(child, arrays))
        return obj
    raise InvalidConfig(f"malformed checkpoint node {sorted(node)}")


def _summary(model: BaseDetector) -> Dict[str, Any]:
    summary: Dict[str, Any] = {
        "class": type(model).__name__,
        "family": model.family.value,
        "n_features": int(model.n_features),
    }
    networks = {}
    if isinstance(model, AEModel):
        networks = {"encoder": model.encoder, "decoder": model.decoder}
    elif isinstance(model, DeepSVDDModel):
        networks = {"network": model.network}
    for name, net in networks.items():
        summary[name] = {
            "layer_dims": net.layer_dims,
            "activations": [layer.activation.value for layer in net.layers],
            "bias": net.has_bias,
        }
    return summary


def save_model(model: BaseDetector, path: Union[str, Path]) -> Path:
    if type(model).__name__ not in MODEL_CLASSES:
        raise InvalidConfig(f"cannot checkpoint {type(model).__name__}")
    encoder = _Encoder()
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "summary": _summary(model),
        "model": encoder.encode(model),
    }
    text = yaml.safe_dump(header, sort_keys=True)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buffer = io.BytesIO()
    np.savez(buffer, **{HEADER_KEY: np.array(text)}, **encoder.arrays)
    path.write_bytes(buffer.getvalue())
    logger.info(f"saved {type(model).__name__} checkpoint with {len(encoder.arrays)} arrays to {path}")
    return path


def read_header(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such checkpoint: {path}")
    with np.load(path, allow_pickle=False) as archive:
        if HEADER_KEY not in archive.files:
            raise InvalidConfig(f"{path} is not an anoscope checkpoint")
        header = yaml.safe_load(str(archive[HEADER_KEY]))
    if header.get("format") != FORMAT_NAME:
        raise InvalidConfig(f"{path} is not an anoscope checkpoint")
    if header.get("version") != FORMAT_VERSION:
        raise InvalidConfig(f"unsupported checkpoint version {header.get('version')}")
    return header


def load_model(path: Union[str, Path]) -> BaseDetector:
    header = read_header(path)
    with np.load(Path(path), allow_pickle=False) as archive:
        arrays = {name: archive[name] for name in archive.files if name != HEADER_KEY}
    model = _decode(header["model"], arrays)
    logger.info(f"loaded {type(model).__name__} checkpoint from {path}")
    return model

"""On-disk formats: labeled tensor datasets, fitted decoders, metrics CSV.

Dataset files carry the magic ``TDK1`` followed by little-endian fields:
u32 mode count K, u32 dims[K], u64 sample count N, u32 class count C, then
``N * prod(dims)`` float64 sample values with the first mode varying fastest
within each sample, then N u32 zero-based labels.
"""

import json
import struct

import numpy as np

from .bttda import BTTDA, Block
from .hoda import HODA
from .pipeline import BTTDAClassifier, FisherScoreSelector, ShrinkageLDA, WhiteningPCA

__all__ = [
    "write_dataset",
    "read_dataset",
    "save_decoder",
    "load_decoder",
    "write_metrics_csv",
    "METRICS_HEADER",
]

_MAGIC = b"TDK1"
METRICS_HEADER = "dataset,subject,session,fold,theta,blocks,metric,value"
_MODEL_VERSION = 1


def _to_sample_major(X):
    """Per-sample Fortran-order flattening of a stack, kept sample-major."""
    n_modes = X.ndim - 1
    axes = (0,) + tuple(range(n_modes, 0, -1))
    return np.ascontiguousarray(X.transpose(axes)).reshape(X.shape[0], -1)


def _from_sample_major(flat, dims):
    n_modes = len(dims)
    stack = flat.reshape((flat.shape[0],) + tuple(dims[::-1]))
    return stack.transpose((0,) + tuple(range(n_modes, 0, -1)))


def write_dataset(path, X, y, n_classes=None):
    """Serialize a labeled stack to the binary dataset format."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim < 2:
        raise ValueError("expected a stack of tensors")
    if y.shape != (X.shape[0],):
        raise ValueError("labels must align with samples")
    if np.any(y < 0):
        raise ValueError("labels must be zero-based nonnegative class indices")
    n_classes = int(n_classes) if n_classes is not None else int(y.max()) + 1
    if np.any(y >= n_classes):
        raise ValueError("labels exceed the declared class count")
    dims = X.shape[1:]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(dims)))
        fh.write(struct.pack(f"<{len(dims)}I", *dims))
        fh.write(struct.pack("<Q", X.shape[0]))
        fh.write(struct.pack("<I", n_classes))
        fh.write(_to_sample_major(X).astype("<f8").tobytes())
        fh.write(y.astype("<u4").tobytes())


def read_dataset(path):
    """Read a dataset file; returns ``(X, y, n_classes)``."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise ValueError("not a tensor dataset file (bad magic)")
    offset = 4
    (n_modes,) = struct.unpack_from("<I", data, offset)
    offset += 4
    dims = struct.unpack_from(f"<{n_modes}I", data, offset)
    offset += 4 * n_modes
    (n_samples,) = struct.unpack_from("<Q", data, offset)
    offset += 8
    (n_classes,) = struct.unpack_from("<I", data, offset)
    offset += 4
    n_values = n_samples * int(np.prod(dims, dtype=np.int64))
    expected = offset + 8 * n_values + 4 * n_samples
    if len(data) != expected:
        raise ValueError(f"file length {len(data)} does not match header ({expected})")
    flat = np.frombuffer(data, dtype="<f8", count=n_values, offset=offset)
    offset += 8 * n_values
    y = np.frombuffer(data, dtype="<u4", count=n_samples, offset=offset).astype(np.int64)
    if n_classes and np.any(y >= n_classes):
        raise ValueError("labels exceed the declared class count")
    X = _from_sample_major(flat.reshape(n_samples, -1).astype(np.float64), dims)
    return np.ascontiguousarray(X), y, int(n_classes)


def save_decoder(path, model):
    """Persist a fitted :class:`BTTDAClassifier` to a versioned npz file."""
    if not hasattr(model, "bttda_"):
        raise ValueError("model must be fitted before saving")
    arrays = {
        "format_version": np.int64(_MODEL_VERSION),
        "params": np.frombuffer(
            json.dumps(model.get_params(), sort_keys=True).encode(), dtype=np.uint8
        ),
        "dims": np.asarray(model.bttda_.dims_, dtype=np.int64),
        "classes": np.asarray(model.classes_),
        "n_blocks": np.int64(model.bttda_.n_blocks_),
        "truncated": np.bool_(model.bttda_.truncated_),
        "train_nmse": model.bttda_.train_nmse_,
        "whitener_mean": model.whitener_.mean_,
        "whitener_components": model.whitener_.components_,
        "whitener_variances": model.whitener_.variances_,
        "whitener_scales": model.whitener_.scales_,
        "whitener_retained": model.whitener_.retained_,
        "selector_scores": model.selector_.scores_,
        "selector_mask": model.selector_.mask_,
        "lda_classes": np.asarray(model.lda_.classes_),
        "lda_priors": model.lda_.priors_,
        "lda_means": model.lda_.means_,
        "lda_covariance": model.lda_.covariance_,
        "lda_coef": model.lda_.coef_,
        "lda_intercept": model.lda_.intercept_,
    }
    for b, block in enumerate(model.bttda_.blocks_):
        arrays[f"block{b}_ranks"] = np.asarray(block.ranks, dtype=np.int64)
        arrays[f"block{b}_nmse"] = np.float64(block.train_nmse)
        arrays[f"block{b}_class_means"] = block.latent_class_means
        for k, proj in enumerate(block.backward.projections_):
            arrays[f"block{b}_mode{k}_projection"] = proj
        for k, pattern in enumerate(block.patterns):
            arrays[f"block{b}_mode{k}_pattern"] = pattern
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_decoder(path):
    """Rebuild a fitted decoder saved by :func:`save_decoder`."""
    with np.load(path, allow_pickle=False) as bundle:
        arrays = {key: bundle[key] for key in bundle.files}
    version = int(arrays["format_version"])
    if version != _MODEL_VERSION:
        raise ValueError(f"unsupported model file version {version}")
    params = json.loads(bytes(arrays["params"]).decode())
    model = BTTDAClassifier(**params)

    dims = tuple(int(d) for d in arrays["dims"])
    classes = arrays["classes"]
    n_blocks = int(arrays["n_blocks"])
    n_modes = len(dims)

    extractor = BTTDA(**{k: params[k] for k in BTTDA().get_params()})
    blocks = []
    for b in range(n_blocks):
        ranks = tuple(int(r) for r in arrays[f"block{b}_ranks"])
        backward = HODA(ranks=ranks)
        backward.projections_ = [
            arrays[f"block{b}_mode{k}_projection"] for k in range(n_modes)
        ]
        backward.ranks_ = ranks
        backward.dims_ = dims
        backward.classes_ = classes
        blocks.append(
            Block(
                backward=backward,
                patterns=[arrays[f"block{b}_mode{k}_pattern"] for k in range(n_modes)],
                ranks=ranks,
                train_nmse=float(arrays[f"block{b}_nmse"]),
                latent_class_means=arrays[f"block{b}_class_means"],
            )
        )
    extractor.blocks_ = blocks
    extractor.n_blocks_ = n_blocks
    extractor.truncated_ = bool(arrays["truncated"])
    extractor.train_nmse_ = arrays["train_nmse"]
    extractor.dims_ = dims
    extractor.classes_ = classes

    whitener = WhiteningPCA()
    whitener.mean_ = arrays["whitener_mean"]
    whitener.components_ = arrays["whitener_components"]
    whitener.variances_ = arrays["whitener_variances"]
    whitener.scales_ = arrays["whitener_scales"]
    whitener.retained_ = arrays["whitener_retained"]
    whitener.n_features_in_ = whitener.mean_.shape[0]

    selector = FisherScoreSelector()
    selector.scores_ = arrays["selector_scores"]
    selector.mask_ = arrays["selector_mask"]
    selector.n_features_in_ = selector.mask_.shape[0]

    lda = ShrinkageLDA(shrinkage=params.get("lda_shrinkage", "auto"))
    lda.classes_ = arrays["lda_classes"]
    lda.priors_ = arrays["lda_priors"]
    lda.means_ = arrays["lda_means"]
    lda.covariance_ = arrays["lda_covariance"]
    lda.coef_ = arrays["lda_coef"]
    lda.intercept_ = arrays["lda_intercept"]
    lda.n_features_in_ = lda.means_.shape[1]

    model.bttda_ = extractor
    model.whitener_ = whitener
    model.selector_ = selector
    model.lda_ = lda
    model.classes_ = lda.classes_
    return model


def write_metrics_csv(path_or_buffer, records):
    """Emit metrics records as CSV with a fixed header and full float precision."""
    lines = [METRICS_HEADER]
    lines.extend(record.csv_row() for record in records)
    text = "\n".join(lines) + "\n"
    if isinstance(path_or_buffer, (str, bytes)) or hasattr(path_or_buffer, "__fspath__"):
        with open(path_or_buffer, "w", newline="") as fh:
            fh.write(text)
    else:
        path_or_buffer.write(text)
    return text

"""File formats: DTT tensors (text and binary), CSV matrices, model directories, reports.

Text tensor (``.dtt``)::

    DTT
    <d>
    <I_1> ... <I_d>
    <prod(I) whitespace-separated reals, last index fastest>

Binary tensor (``.dttb``): magic ``DTTB``, little-endian uint32 ``d``,
``d`` little-endian uint32 dims, then little-endian float64 values in the
same order. Reals are printed with 17 significant digits.
"""

from pathlib import Path
import struct

import numpy as np

from .core import OntdModel

__all__ = [
    "FormatError",
    "format_real",
    "read_tensor",
    "write_tensor",
    "read_matrix_csv",
    "write_matrix_csv",
    "read_keyvalue",
    "write_keyvalue",
    "save_model",
    "load_model",
    "tensor_path",
]

TEXT_MAGIC = "DTT"
BINARY_MAGIC = b"DTTB"
EXTENSIONS = {"text": ".dtt", "binary": ".dttb"}


class FormatError(ValueError):
    """Malformed or inconsistent input file."""


def format_real(x):
    return format(float(x), ".17g")


def _check_finite(values, path):
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path}: non-finite values are not allowed")


def tensor_path(stem, fmt):
    return Path(str(stem) + EXTENSIONS[fmt])


def write_tensor(T, path, fmt=None):
    """Write ``T`` in text or binary DTT format (default: by file extension)."""
    T = np.asarray(T, dtype=np.float64)
    path = Path(path)
    if fmt is None:
        fmt = "binary" if path.suffix == ".dttb" else "text"
    if fmt == "binary":
        head = BINARY_MAGIC + struct.pack(f"<I{T.ndim}I", T.ndim, *T.shape)
        path.write_bytes(head + T.astype("<f8").tobytes(order="C"))
    elif fmt == "text":
        lines = [TEXT_MAGIC, str(T.ndim), " ".join(str(s) for s in T.shape)]
        lines.append(" ".join(format_real(v) for v in T.ravel()))
        path.write_text("\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown tensor format {fmt!r}")


def read_tensor(path):
    """Read a DTT tensor; the format is detected from the magic bytes."""
    path = Path(path)
    raw = path.read_bytes()
    if raw.startswith(BINARY_MAGIC):
        if len(raw) < 8:
            raise FormatError(f"{path}: truncated header")
        (d,) = struct.unpack_from("<I", raw, 4)
        if d < 1 or len(raw) < 8 + 4 * d:
            raise FormatError(f"{path}: truncated or invalid header (d={d})")
        dims = struct.unpack_from(f"<{d}I", raw, 8)
        payload = raw[8 + 4 * d:]
        count = int(np.prod(dims))
        if any(s < 1 for s in dims) or len(payload) != 8 * count:
            raise FormatError(
                f"{path}: expected {count} values for dims {dims}, found {len(payload) / 8:g}"
            )
        T = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(dims)
    else:
        try:
            text = raw.decode("ascii")
        except UnicodeDecodeError:
            raise FormatError(f"{path}: not a DTT file") from None
        lines = text.split("\n", 3)
        if not lines or lines[0].strip() != TEXT_MAGIC:
            raise FormatError(f"{path}: bad magic {lines[0][:8]!r}")
        try:
            d = int(lines[1])
            dims = tuple(int(s) for s in lines[2].split())
            values = np.array(lines[3].split() if len(lines) > 3 else [], dtype=np.float64)
        except (IndexError, ValueError) as exc:
            raise FormatError(f"{path}: malformed header or values ({exc})") from None
        if len(dims) != d or d < 1 or any(s < 1 for s in dims):
            raise FormatError(f"{path}: header declares d={d} but dims are {dims}")
        if values.size != int(np.prod(dims)):
            raise FormatError(
                f"{path}: expected {int(np.prod(dims))} values for dims {dims}, found {values.size}"
            )
        T = values.reshape(dims)
    _check_finite(T, path)
    return T


def write_matrix_csv(M, path):
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    Path(path).write_text("".join(",".join(format_real(v) for v in row) + "\n" for row in M))


def read_matrix_csv(path):
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
        if len(rows[-1]) != len(rows[0]):
            raise FormatError(f"{path}:{lineno}: ragged row ({len(rows[-1])} vs {len(rows[0])} columns)")
    if not rows:
        raise FormatError(f"{path}: empty matrix file")
    M = np.array(rows)
    _check_finite(M, path)
    return M


def read_keyvalue(path):
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _fmt_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_real(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt_value(x) for x in v)
    return str(v)


def write_keyvalue(path, items):
    Path(path).write_text("".join(f"{k} = {_fmt_value(v)}\n" for k, v in items))


def save_model(model, directory, fmt="binary"):
    """Model directory: ``model.txt``, ``core.dtt[b]`` and ``U<n>.csv`` per factored mode."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_tensor(model.core, tensor_path(directory / "core", fmt), fmt)
    for n, U in enumerate(model.factors):
        if U is not None:
            write_matrix_csv(U, directory / f"U{n}.csv")
    write_keyvalue(directory / "model.txt", [
        ("order", model.core.ndim),
        ("dims", list(model.dims)),
        ("ranks", list(model.ranks)),
        ("identity_modes", list(model.identity_modes)),
    ])


def load_model(directory):
    directory = Path(directory)
    meta_path = directory / "model.txt"
    if not meta_path.exists():
        raise FormatError(f"{directory}: no model.txt")
    meta = read_keyvalue(meta_path)
    cores = [p for p in (directory / "core.dttb", directory / "core.dtt") if p.exists()]
    if not cores:
        raise FormatError(f"{directory}: no core tensor file")
    core = read_tensor(cores[0])
    identity = {int(s) for s in meta.get("identity_modes", "").split(",") if s.strip()}
    factors = []
    for n in range(core.ndim):
        if n in identity:
            factors.append(None)
        else:
            factors.append(read_matrix_csv(directory / f"U{n}.csv"))
    try:
        return OntdModel(core=core, factors=factors)
    except ValueError as exc:
        raise FormatError(f"{directory}: inconsistent model ({exc})") from None

"""Dataset ingestion, the class/train-test split protocol and synthetic data.

Images are converted to grayscale with fixed luma weights, resized to S x S by
bilinear interpolation (half-pixel centers, edge clamping, no antialiasing),
scaled to [0, 1] and flattened row-major to D = S*S features.
"""
from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .rng import Stream, derive_seed

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

PNM_SUFFIXES = {".pgm", ".ppm", ".pnm"}
IMAGE_SUFFIXES = PNM_SUFFIXES | {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tif", ".tiff"}

CACHE_MAGIC = b"RBDS"
CACHE_VERSION = 1


@dataclass(eq=False)
class LabeledDataset:
    xs: np.ndarray
    labels: np.ndarray
    name: str
    class_count: int
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.xs.ndim != 2 or len(self.labels) != len(self.xs):
            raise DataError(f"{self.name}: features {self.xs.shape} and labels {self.labels.shape} do not line up")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
            raise DataError(f"{self.name}: labels must lie in [0, {self.class_count})")
        if not self.class_names:
            self.class_names = tuple(str(i) for i in range(self.class_count))

    def __len__(self):
        return len(self.labels)

    @property
    def d(self) -> int:
        return self.xs.shape[1]

    def subset(self, idx, name: str | None = None) -> "LabeledDataset":
        return LabeledDataset(self.xs[idx], self.labels[idx], name or self.name, self.class_count, self.class_names)


# -- image codecs -------------------------------------------------------------


def _pnm_tokens(buf: bytes, count: int, pos: int):
    tokens = []
    while len(tokens) < count:
        while pos < len(buf) and buf[pos : pos + 1].isspace():
            pos += 1
        if buf[pos : pos + 1] == b"#":
            while pos < len(buf) and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ValueError("truncated header")
        tokens.append(buf[start:pos])
    return tokens, pos


def read_pnm(path) -> np.ndarray:
    """Decode a PGM/PPM file (P2, P3, P5, P6) to floats in [0, 1].

    Returns an (H, W) array for graymaps and (H, W, 3) for pixmaps.
    """
    path = Path(path)
    try:
        buf = path.read_bytes()
        magic = buf[:2]
        if magic not in (b"P2", b"P3", b"P5", b"P6"):
            raise ValueError(f"unsupported magic {magic!r}")
        (w, h, maxval), pos = _pnm_tokens(buf, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
        if not (0 < maxval < 65536) or w <= 0 or h <= 0:
            raise ValueError("bad header values")
        channels = 3 if magic in (b"P3", b"P6") else 1
        count = w * h * channels
        if magic in (b"P5", b"P6"):
            pos += 1  # single whitespace byte after maxval
            dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
            raw = np.frombuffer(buf, dtype=dtype, count=count, offset=pos)
        else:
            raw = np.array(buf[pos:].split()[:count], dtype=np.int64)
            if raw.size != count:
                raise ValueError("truncated pixel data")
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc
    img = raw.astype(np.float64) / maxval
    return img.reshape(h, w, 3) if channels == 3 else img.reshape(h, w)


def write_pgm(path, img) -> None:
    """Write a 2-D array in [0, 1] as an 8-bit binary PGM (values clipped)."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {img.shape}")
    px = np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w = px.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(px.tobytes())


def read_image(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() in PNM_SUFFIXES:
        return read_pnm(path)
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover
        raise DataError(f"cannot read {path}: Pillow is needed for {path.suffix} files") from exc
    try:
        with Image.open(path) as im:
            im = im.convert("RGB") if im.mode not in ("L", "I;16", "I") else im
            arr = np.asarray(im, dtype=np.float64)
            scale = 65535.0 if im.mode in ("I;16", "I") else 255.0
    except OSError as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc
    return arr / scale


def to_grayscale(img) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] >= 3:
        return img[..., :3] @ np.array(LUMA_WEIGHTS)
    raise ValueError(f"cannot convert image of shape {img.shape} to grayscale")


def _axis_weights(n_in: int, n_out: int):
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, src - i0


def resize_bilinear(img, shape: tuple[int, int]) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    h_out, w_out = shape
    r0, r1, rt = _axis_weights(img.shape[0], h_out)
    c0, c1, ct = _axis_weights(img.shape[1], w_out)
    rows = img[r0] * (1.0 - rt)[:, None] + img[r1] * rt[:, None]
    return rows[:, c0] * (1.0 - ct) + rows[:, c1] * ct


def image_to_vector(img, size: int) -> np.ndarray:
    """Grayscale, resize to ``size`` x ``size``, clip to [0, 1], flatten row-major."""
    gray = to_grayscale(img)
    return np.clip(resize_bilinear(gray, (size, size)), 0.0, 1.0).ravel()


def vector_to_image(x, size: int | None = None) -> np.ndarray:
    x = np.asarray(x)
    size = size or math.isqrt(x.size)
    if size * size != x.size:
        raise ValueError(f"vector of length {x.size} is not a square image")
    return x.reshape(size, size)


# -- dataset loaders ------------------------------------------------------------


def load_image_dir(path, size: int, name: str | None = None) -> LabeledDataset:
    """Load ``<root>/<class>/<image>`` into a dataset of ``size*size`` features.

    Classes are labelled by sorted directory name, files read in sorted order.
    """
    root = Path(path)
    if not root.is_dir():
        raise DataError(f"image directory {root} does not exist")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith("."))
    if not class_dirs:
        raise DataError(f"no class directories under {root}")
    xs, labels = [], []
    for label, cdir in enumerate(class_dirs):
        files = sorted(
            f for f in cdir.iterdir()
            if f.is_file() and not f.name.startswith(".") and f.suffix.lower() in IMAGE_SUFFIXES
        )
        if not files:
            raise DataError(f"class directory {cdir} contains no images")
        for f in files:
            xs.append(image_to_vector(read_image(f), size))
            labels.append(label)
    return LabeledDataset(
        xs=np.stack(xs),
        labels=np.array(labels),
        name=name or root.name,
        class_count=len(class_dirs),
        class_names=tuple(c.name for c in class_dirs),
    )


def load_cifar_binary(paths, size: int, name: str = "cifar10") -> LabeledDataset:
    """Load CIFAR-10 binary batches (1 label byte + 3 x 1024 planar bytes per record)."""
    if isinstance(paths, (str, os.PathLike)):
        paths = [paths]
    record = 1 + 3 * 32 * 32
    xs, labels = [], []
    for p in sorted(Path(p) for p in paths):
        try:
            buf = np.fromfile(p, dtype=np.uint8)
        except OSError as exc:
            raise DataError(f"cannot read CIFAR batch {p}: {exc}") from exc
        if buf.size == 0 or buf.size % record:
            raise DataError(f"{p} is not a CIFAR-10 binary batch")
        recs = buf.reshape(-1, record)
        imgs = recs[:, 1:].reshape(-1, 3, 32, 32).transpose(0, 2, 3, 1) / 255.0
        labels.append(recs[:, 0].astype(np.int64))
        xs.extend(image_to_vector(img, size) for img in imgs)
    labels = np.concatenate(labels)
    return LabeledDataset(np.stack(xs), labels, name, int(labels.max()) + 1)


def load_dataset_source(path, size: int, fmt: str = "auto", name: str | None = None) -> LabeledDataset:
    """Load an image tree, CIFAR binary batches or a dataset cache file."""
    path = Path(path)
    if fmt == "auto":
        if path.is_dir():
            fmt = "cifar_binary" if any(path.glob("*_batch*.bin")) else "image_dir"
        elif path.suffix == ".rbds":
            fmt = "cache"
        else:
            fmt = "cifar_binary"
    if fmt == "image_dir":
        return load_image_dir(path, size, name)
    if fmt == "cache":
        return load_cache(path, name)
    if fmt == "cifar_binary":
        files = sorted(path.glob("*_batch*.bin")) if path.is_dir() else [path]
        return load_cifar_binary(files, size, name or "cifar10")
    raise DataError(f"unknown dataset format {fmt!r}")


def save_cache(ds: LabeledDataset, path) -> None:
    """Write ``ds`` as: magic, u32 version, u64 N, D, class_count, f32 data, i32 labels (LE)."""
    n, d = ds.xs.shape
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<IQQQ", CACHE_VERSION, n, d, ds.class_count))
        fh.write(ds.xs.astype("<f4").tobytes())
        fh.write(ds.labels.astype("<i4").tobytes())


def load_cache(path, name: str | None = None) -> LabeledDataset:
    path = Path(path)
    buf = path.read_bytes()
    if buf[:4] != CACHE_MAGIC:
        raise DataError(f"{path} is not a dataset cache")
    version, n, d, class_count = struct.unpack_from("<IQQQ", buf, 4)
    if version != CACHE_VERSION:
        raise DataError(f"{path}: unsupported cache version {version}")
    off = 4 + struct.calcsize("<IQQQ")
    if len(buf) != off + 4 * n * d + 4 * n:
        raise DataError(f"{path}: truncated cache")
    xs = np.frombuffer(buf, "<f4", n * d, off).reshape(n, d).astype(np.float64)
    labels = np.frombuffer(buf, "<i4", n, off + 4 * n * d).astype(np.int64)
    return LabeledDataset(xs, labels, name or path.stem, int(class_count))


def write_image_tree(ds: LabeledDataset, root, size: int | None = None) -> None:
    """Dump ``ds`` as ``<root>/<class_name>/<index>.pgm`` (8-bit)."""
    root = Path(root)
    counters: dict[int, int] = {}
    for x, y in zip(ds.xs, ds.labels):
        cdir = root / ds.class_names[y]
        cdir.mkdir(parents=True, exist_ok=True)
        i = counters.get(int(y), 0)
        counters[int(y)] = i + 1
        write_pgm(cdir / f"{i:04d}.pgm", vector_to_image(x, size))


# -- split protocol -------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    class_partition_seed: int = 0
    per_class_train_fraction: float = 0.75
    classes_per_side: int | None = None
    train_test_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.per_class_train_fraction < 1.0:
            raise ValueError("per_class_train_fraction must lie in (0, 1)")


def _relabel(ds: LabeledDataset, classes, name: str) -> LabeledDataset:
    classes = np.asarray(classes)
    lut = np.full(ds.class_count, -1, dtype=np.int64)
    lut[classes] = np.arange(len(classes))
    idx = np.flatnonzero(lut[ds.labels] >= 0)
    return LabeledDataset(
        ds.xs[idx],
        lut[ds.labels[idx]],
        name,
        len(classes),
        tuple(ds.class_names[c] for c in classes),
    )


def split_by_class(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Partition classes into two disjoint groups (main, sub), relabelled from 0."""
    per_side = spec.classes_per_side or ds.class_count // 2
    if per_side < 1 or 2 * per_side > ds.class_count:
        raise DataError(f"cannot take {per_side} classes per side from {ds.class_count} classes")
    perm = Stream(spec.class_partition_seed).permutation(ds.class_count)
    main = np.sort(perm[:per_side])
    sub = np.sort(perm[per_side : 2 * per_side])
    return _relabel(ds, main, f"{ds.name}-main"), _relabel(ds, sub, f"{ds.name}-sub")


def split_train_test(ds: LabeledDataset, train_fraction: float, seed: int = 0):
    """Stratified split: ``floor(n_c * train_fraction)`` rows of each class train."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    train_idx, test_idx = [], []
    for c in range(ds.class_count):
        idx = np.flatnonzero(ds.labels == c)
        if len(idx) == 0:
            continue
        if len(idx) < 2:
            raise DataError(f"class {ds.class_names[c]!r} has fewer than 2 samples")
        n_train = math.floor(len(idx) * train_fraction)
        if n_train == 0 or n_train == len(idx):
            raise DataError(f"fraction {train_fraction} leaves one side empty for class {ds.class_names[c]!r}")
        order = Stream(derive_seed(seed, "train_test", c)).permutation(len(idx))
        train_idx.append(idx[order[:n_train]])
        test_idx.append(idx[order[n_train:]])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    return ds.subset(train_idx, f"{ds.name}-train"), ds.subset(test_idx, f"{ds.name}-test")


def split_protocol(ds: LabeledDataset, spec: SplitSpec):
    """Return (train, test, sub): class split, then stratified train/test on main."""
    main, sub = split_by_class(ds, spec)
    train, test = split_train_test(main, spec.per_class_train_fraction, spec.train_test_seed)
    return train, test, sub


# -- synthetic data ---------------------------------------------------------------


def _blob(u, v, cu, cv, su, sv):
    return np.exp(-0.5 * (((u - cu) / su) ** 2 + ((v - cv) / sv) ** 2))


def _face_prototype(stream: Stream, size: int) -> np.ndarray:
    g = np.linspace(-1.0, 1.0, size)
    v, u = np.meshgrid(g, g, indexing="ij")  # v: rows (down), u: columns
    r = stream.uniform(16)
    head_w, head_h = 0.62 + 0.12 * r[0], 0.82 + 0.1 * r[1]
    skin = 0.5 + 0.25 * r[2]
    ell = (u / head_w) ** 2 + ((v + 0.05) / head_h) ** 2
    face = 0.12 + (skin - 0.12) / (1.0 + np.exp((ell - 1.0) * 12.0))
    eye_dx, eye_y = 0.28 + 0.1 * r[3], -0.2 + 0.1 * (r[4] - 0.5)
    eye_s = 0.07 + 0.04 * r[5]
    for side in (-1.0, 1.0):
        face -= 0.35 * skin * _blob(u, v, side * eye_dx, eye_y, eye_s * 1.4, eye_s)
        face -= 0.15 * skin * _blob(u, v, side * eye_dx, eye_y - 0.16, 0.14, 0.035)  # brows
    face += 0.08 * _blob(u, v, 0.0, 0.1 + 0.05 * r[6], 0.06, 0.16)  # nose
    face -= 0.3 * skin * _blob(u, v, 0.0, 0.45 + 0.08 * r[7], 0.16 + 0.08 * r[8], 0.04)
    bumps = stream.normal(12).reshape(4, 3)
    for a, cu, cv in bumps:
        face += 0.05 * a * _blob(u, v, 0.4 * cu, 0.4 * cv, 0.25, 0.25)
    return np.clip(face, 0.0, 1.0).ravel()


def synth_faces(
    classes: int, per_class: int, d: int, seed: int, snr: float = 5.0, name: str = "synth-faces"
) -> LabeledDataset:
    """Face-like stand-in data: class prototypes plus seeded perturbations.

    When ``d`` is a perfect square each prototype is a smooth S x S face
    (head ellipse, eyes, brows, nose, mouth, identity-specific shape). Each
    sample applies a random illumination gradient and white noise, both
    scaled by ``1/snr``; ``snr=inf`` makes all samples of a class identical.
    Values are clipped to [0, 1].
    """
    if classes < 1 or per_class < 1 or d < 1:
        raise ValueError("classes, per_class and d must be positive")
    if snr <= 0:
        raise ValueError("snr must be positive")
    noise = 0.0 if math.isinf(snr) else 1.0 / snr
    size = math.isqrt(d)
    proto_stream = Stream(derive_seed(seed, "prototypes"))
    if size * size == d:
        protos = np.stack([_face_prototype(proto_stream, size) for _ in range(classes)])
        g = np.linspace(-1.0, 1.0, size)
        gv, gu = np.meshgrid(g, g, indexing="ij")
        gu, gv = gu.ravel(), gv.ravel()
    else:
        protos = 0.2 + 0.6 * proto_stream.uniform(classes * d).reshape(classes, d)
        gu = np.linspace(-1.0, 1.0, d)
        gv = np.zeros(d)
    labels = np.repeat(np.arange(classes), per_class)
    n = len(labels)
    s = Stream(derive_seed(seed, "samples"))
    light = s.normal(2 * n).reshape(n, 2)
    white = s.normal(n * d).reshape(n, d)
    gain = 1.0 + noise * (light[:, :1] * gu + light[:, 1:] * gv)
    xs = np.clip(protos[labels] * gain + 0.25 * noise * white, 0.0, 1.0)
    return LabeledDataset(xs, labels, name, classes, tuple(f"class{c:02d}" for c in range(classes)))


def synth_textures(n: int, d: int, seed: int, classes: int = 10, name: str = "synth-textures") -> LabeledDataset:
    """Non-face images from a different distribution (oriented gratings + blobs).

    Class ``c`` fixes the grating orientation; used as a type-2 attacker set.
    """
    if n < 1 or d < 1 or classes < 1:
        raise ValueError("n, d and classes must be positive")
    size = math.isqrt(d)
    s = Stream(derive_seed(seed, "textures"))
    labels = np.arange(n) % classes
    if size * size == d:
        g = np.linspace(-1.0, 1.0, size)
        gv, gu = np.meshgrid(g, g, indexing="ij")
        gu, gv = gu.ravel(), gv.ravel()
    else:
        gu, gv = np.linspace(-1.0, 1.0, d), np.zeros(d)
    r = s.uniform(n * 8).reshape(n, 8)
    theta = np.pi * (labels + 0.5 * r[:, 0]) / classes
    freq = 2.0 + 6.0 * r[:, 1]
    phase = 2.0 * np.pi * r[:, 2]
    proj = np.cos(theta)[:, None] * gu + np.sin(theta)[:, None] * gv
    xs = 0.5 + 0.3 * r[:, 3:4] * np.sin(freq[:, None] * np.pi * proj + phase[:, None])
    cu, cv = 2.0 * r[:, 4] - 1.0, 2.0 * r[:, 5] - 1.0
    blob = np.exp(-((gu - cu[:, None]) ** 2 + (gv - cv[:, None]) ** 2) / (0.05 + 0.3 * r[:, 6:7]))
    xs += (r[:, 7:8] - 0.5) * 0.8 * blob
    xs += 0.03 * s.normal(n * d).reshape(n, d)
    return LabeledDataset(np.clip(xs, 0.0, 1.0), labels, name, classes)

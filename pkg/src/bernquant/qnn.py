"""Alphabet-constrained feed-forward networks with skip connections.

Node ids share one space: ids ``0 .. input_arity-1`` are input slots (layer
0) and every computed node follows. A node computes

    activation(sum_{edges e into node} weight_e * value(src_e) + bias)

with activations ``identity``, ``relu`` (``max(t, 0)``) or ``quadratic``
(``t^2 / 2``). Every edge must leave a strictly earlier layer; edges that
span several layers are skip connections.

Size accounting ``(L, N, P)``: ``L`` is the deepest layer, ``N`` counts
non-input nodes (outputs included) and ``P`` counts connections (edges,
skips included). Biases are free, which is what makes the tent block
``(2, 4, 6)`` and the quadratic product block ``(2, 4, 7)``. Sizes add under
:func:`compose`.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import AlphabetViolation, DomainError, NetFormatError
from .sigma_delta import Alphabet

__all__ = [
    "ACTIVATIONS",
    "SizeTriple",
    "QuantNet",
    "NetBuilder",
    "evaluate_net",
    "size_of",
    "compose",
    "serialize_net",
    "deserialize_net",
    "save_net",
    "load_net",
    "FORMAT_VERSION",
    "MAGIC",
]

ACTIVATIONS = ("identity", "relu", "quadratic")
MAGIC = b"QNN1"
FORMAT_VERSION = 1
_MAX_BATCH_ELEMENTS = 1 << 23


@dataclass(frozen=True)
class SizeTriple:
    layers: int
    neurons: int
    params: int

    def __add__(self, other: "SizeTriple") -> "SizeTriple":
        return SizeTriple(self.layers + other.layers, self.neurons + other.neurons, self.params + other.params)

    def __sub__(self, other: "SizeTriple") -> "SizeTriple":
        return SizeTriple(self.layers - other.layers, self.neurons - other.neurons, self.params - other.params)

    def as_tuple(self):
        return (self.layers, self.neurons, self.params)


def _activate(code: int, t: np.ndarray) -> np.ndarray:
    if code == 0:
        return t
    if code == 1:
        return np.maximum(t, 0.0)
    return 0.5 * t * t


class QuantNet:
    """Immutable quantized network; see the module docstring for conventions."""

    def __init__(
        self,
        input_arity: int,
        alphabet: Alphabet,
        layers: Sequence[int],
        activations: Sequence[str],
        biases: Sequence[float],
        src: Sequence[int],
        dst: Sequence[int],
        weights: Sequence[float],
        outputs: Sequence[int],
        metadata: dict | None = None,
    ):
        self.input_arity = int(input_arity)
        self.alphabet = alphabet
        self.layers = np.asarray(layers, dtype=np.int64).ravel()
        acts = list(activations)
        for a in acts:
            if a not in ACTIVATIONS:
                raise NetFormatError(f"unknown activation {a!r}")
        self.activation_codes = np.array([ACTIVATIONS.index(a) for a in acts], dtype=np.int8)
        self.biases = np.asarray(biases, dtype=float).ravel()
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        weights = np.asarray(weights, dtype=float).ravel()
        order = np.lexsort((src, dst))
        self.src, self.dst, self.weights = src[order], dst[order], weights[order]
        self.outputs = tuple(int(o) for o in outputs)
        self.metadata = dict(metadata or {})
        self._validate()
        for arr in (self.layers, self.activation_codes, self.biases, self.src, self.dst, self.weights):
            arr.setflags(write=False)
        self._plan_cache = None

    # ------------------------------------------------------------------ structure
    @property
    def num_nodes(self) -> int:
        return int(self.layers.shape[0])

    @property
    def total_ids(self) -> int:
        return self.input_arity + self.num_nodes

    @property
    def activations(self) -> list[str]:
        return [ACTIVATIONS[c] for c in self.activation_codes]

    def layer_of(self, node_id: int) -> int:
        return 0 if node_id < self.input_arity else int(self.layers[node_id - self.input_arity])

    def _validate(self):
        nn_ = self.num_nodes
        if self.input_arity < 0:
            raise NetFormatError("negative input arity")
        if not (len(self.activation_codes) == len(self.biases) == nn_):
            raise NetFormatError("node arrays have inconsistent lengths")
        if not (len(self.src) == len(self.dst) == len(self.weights)):
            raise NetFormatError("edge arrays have inconsistent lengths")
        if nn_ and self.layers.min() < 1:
            raise NetFormatError("computed nodes must sit in layer >= 1")
        total = self.total_ids
        if len(self.src) and (self.src.min() < 0 or self.src.max() >= total):
            raise NetFormatError("dangling edge source")
        if len(self.dst) and (self.dst.min() < self.input_arity or self.dst.max() >= total):
            raise NetFormatError("dangling edge destination")
        if len(self.src):
            lay = np.concatenate([np.zeros(self.input_arity, dtype=np.int64), self.layers])
            if np.any(lay[self.src] >= lay[self.dst]):
                raise NetFormatError("edge does not go to a strictly later layer (cycle or same-layer edge)")
        for o in self.outputs:
            if not self.input_arity <= o < total:
                raise NetFormatError(f"output id {o} is not a computed node")
        self.alphabet.check(self.weights, "weight")
        nz = self.biases[self.biases != 0.0]
        self.alphabet.check(nz, "bias")

    def size(self) -> SizeTriple:
        return SizeTriple(int(self.layers.max()) if self.num_nodes else 0, self.num_nodes, int(len(self.src)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantNet):
            return NotImplemented
        return (
            self.input_arity == other.input_arity
            and self.alphabet == other.alphabet
            and self.outputs == other.outputs
            and np.array_equal(self.layers, other.layers)
            and np.array_equal(self.activation_codes, other.activation_codes)
            and np.array_equal(self.biases, other.biases)
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.weights, other.weights)
            and self.metadata == other.metadata
        )

    __hash__ = None

    def __repr__(self):
        s = self.size()
        return (
            f"QuantNet(inputs={self.input_arity}, outputs={len(self.outputs)}, "
            f"size=({s.layers}, {s.neurons}, {s.params}), alphabet={list(self.alphabet.levels)})"
        )

    # ---------------------------------------------------------------- evaluation
    def _plan(self):
        if self._plan_cache is not None:
            return self._plan_cache
        I, total = self.input_arity, self.total_ids
        edge_layer = self.layers[self.dst - I] if len(self.dst) else np.zeros(0, dtype=np.int64)
        node_order = np.argsort(self.layers, kind="stable")
        edge_order = np.argsort(edge_layer, kind="stable")
        node_layers = self.layers[node_order]
        edge_layers = edge_layer[edge_order]
        plan = []
        for lay in np.unique(node_layers):
            lo, hi = np.searchsorted(node_layers, [lay, lay + 1])
            members = node_order[lo:hi]
            pos = np.empty(self.num_nodes, dtype=np.int64)
            pos[members] = np.arange(len(members))
            elo, ehi = np.searchsorted(edge_layers, [lay, lay + 1])
            sel = edge_order[elo:ehi]
            mat = sparse.csr_matrix(
                (self.weights[sel], (pos[self.dst[sel] - I], self.src[sel])), shape=(len(members), total)
            )
            mat.sum_duplicates()
            mat.sort_indices()
            codes = self.activation_codes[members]
            groups = [(c, np.flatnonzero(codes == c)) for c in np.unique(codes)]
            plan.append((members + I, mat, self.biases[members][:, None], groups))
        self._plan_cache = plan
        return plan

    def evaluate(self, x) -> np.ndarray:
        """Evaluate on one input vector (returns ``(n_out,)``) or a batch ``(P, arity)``."""
        arr = np.asarray(x, dtype=float)
        single = arr.ndim <= 1
        arr = arr.reshape(1, -1) if single else arr
        if arr.shape[1] != self.input_arity:
            raise DomainError(f"network expects {self.input_arity} inputs, got {arr.shape[1]}")
        plan = self._plan()
        outs = np.asarray(self.outputs, dtype=np.int64)
        chunk = max(1, min(arr.shape[0], _MAX_BATCH_ELEMENTS // max(1, self.total_ids)))
        result = np.empty((arr.shape[0], len(outs)))
        for start in range(0, arr.shape[0], chunk):
            block = arr[start : start + chunk]
            vals = np.zeros((self.total_ids, block.shape[0]))
            vals[: self.input_arity] = block.T
            for ids, mat, bias, groups in plan:
                pre = mat @ vals + bias
                for code, rows in groups:
                    vals[ids[rows]] = _activate(code, pre[rows])
            result[start : start + chunk] = vals[outs].T
        return result[0] if single else result


class NetBuilder:
    """Incremental construction of a :class:`QuantNet`.

    Weights are checked against the alphabet as they are added, so a builder
    can never hold an illegal connection.
    """

    def __init__(self, input_arity: int, alphabet: Alphabet):
        self.input_arity = int(input_arity)
        self.alphabet = alphabet
        self._layers: list[int] = []
        self._acts: list[str] = []
        self._biases: list[float] = []
        self._src: list[int] = []
        self._dst: list[int] = []
        self._w: list[float] = []

    @classmethod
    def from_net(cls, net: QuantNet) -> "NetBuilder":
        b = cls(net.input_arity, net.alphabet)
        b._layers = net.layers.tolist()
        b._acts = net.activations
        b._biases = net.biases.tolist()
        b._src = net.src.tolist()
        b._dst = net.dst.tolist()
        b._w = net.weights.tolist()
        return b

    def input(self, i: int) -> int:
        if not 0 <= i < self.input_arity:
            raise DomainError(f"input slot {i} outside 0..{self.input_arity - 1}")
        return i

    def layer_of(self, node: int) -> int:
        return 0 if node < self.input_arity else self._layers[node - self.input_arity]

    @property
    def depth(self) -> int:
        return max(self._layers, default=0)

    def add(self, inputs: Iterable[tuple[int, float]], activation: str = "identity", bias: float = 0.0, layer: int | None = None) -> int:
        """Append a node fed by ``(source, weight)`` pairs and return its id.

        The node sits one layer after its deepest source unless ``layer`` asks
        for a later one.
        """
        if activation not in ACTIVATIONS:
            raise DomainError(f"unknown activation {activation!r}")
        inputs = [(int(s), float(w)) for s, w in inputs]
        node = self.input_arity + len(self._layers)
        need = 1 + max((self.layer_of(s) for s, _ in inputs), default=0)
        if layer is None:
            layer = need
        elif layer < need:
            raise DomainError(f"layer {layer} is not after all sources (needs >= {need})")
        for s, w in inputs:
            if not 0 <= s < node:
                raise DomainError(f"source {s} does not exist yet")
            if w not in self.alphabet:
                raise AlphabetViolation(f"weight {w!r} is not in alphabet {list(self.alphabet.levels)}")
        if bias != 0.0 and bias not in self.alphabet:
            raise AlphabetViolation(f"bias {bias!r} is not in alphabet {list(self.alphabet.levels)}")
        self._layers.append(int(layer))
        self._acts.append(activation)
        self._biases.append(float(bias))
        for s, w in inputs:
            self._src.append(s)
            self._dst.append(node)
            self._w.append(w)
        return node

    def embed(self, net: QuantNet, sources: Sequence[int]) -> list[int]:
        """Copy ``net`` into this builder, wiring its inputs to ``sources``.

        The copy is shifted so that its layer 0 coincides with the deepest
        source; returns the ids of its outputs.
        """
        if len(sources) != net.input_arity:
            raise DomainError(f"embedded net takes {net.input_arity} inputs, got {len(sources)}")
        offset = max((self.layer_of(s) for s in sources), default=0)
        base = self.input_arity + len(self._layers)
        mapping = np.concatenate([np.asarray(sources, dtype=np.int64), base + np.arange(net.num_nodes)])
        self._layers.extend((net.layers + offset).tolist())
        self._acts.extend(net.activations)
        self._biases.extend(net.biases.tolist())
        self._src.extend(mapping[net.src].tolist())
        self._dst.extend(mapping[net.dst].tolist())
        self._w.extend(net.weights.tolist())
        return [int(mapping[o]) for o in net.outputs]

    @property
    def num_nodes(self) -> int:
        return len(self._layers)

    def build(self, outputs: Sequence[int], metadata: dict | None = None) -> QuantNet:
        return QuantNet(
            self.input_arity,
            self.alphabet,
            self._layers,
            self._acts,
            self._biases,
            self._src,
            self._dst,
            self._w,
            outputs,
            metadata,
        )


def evaluate_net(net: QuantNet, x) -> np.ndarray:
    return net.evaluate(x)


def size_of(net: QuantNet) -> SizeTriple:
    return net.size()


def compose(first: QuantNet, second: QuantNet) -> QuantNet:
    """Feed the outputs of ``first`` into the inputs of ``second``."""
    if first.alphabet != second.alphabet:
        raise DomainError("cannot compose networks over different alphabets")
    b = NetBuilder.from_net(first)
    outs = b.embed(second, list(first.outputs))
    return b.build(outs, metadata={"composed": [first.metadata, second.metadata]})


# -------------------------------------------------------------------- file format
def _pack_codes(codes: np.ndarray, bits: int) -> bytes:
    if codes.size == 0:
        return b""
    shifts = np.arange(bits - 1, -1, -1, dtype=np.int64)
    bitmat = ((codes[:, None] >> shifts) & 1).astype(np.uint8)
    return np.packbits(bitmat.ravel()).tobytes()


def _unpack_codes(blob: bytes, bits: int, count: int) -> np.ndarray:
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    flat = np.unpackbits(np.frombuffer(blob, dtype=np.uint8))[: count * bits]
    if flat.size != count * bits:
        raise NetFormatError("packed weight section is truncated")
    shifts = np.arange(bits - 1, -1, -1, dtype=np.int64)
    return (flat.reshape(count, bits).astype(np.int64) << shifts).sum(axis=1)


def serialize_net(net: QuantNet, packed: bool = True) -> bytes:
    """Encode ``net`` as a ``.qnn`` container.

    Layout: ``b"QNN1"``, little-endian uint32 header length, JSON header,
    optional packed weight section (``ceil(log2 |alphabet|)`` bits per
    weight, codes index the sorted alphabet), then the CRC-32 of everything
    before it. The header carries its own CRC of the packed section.
    """
    header = {
        "format_version": FORMAT_VERSION,
        "alphabet": list(net.alphabet.levels),
        "input_arity": net.input_arity,
        "layers": net.layers.tolist(),
        "activations": net.activations,
        "biases": net.biases.tolist(),
        "src": net.src.tolist(),
        "dst": net.dst.tolist(),
        "outputs": list(net.outputs),
        "metadata": net.metadata,
    }
    blob = b""
    if packed:
        bits = max(1, int(np.ceil(np.log2(len(net.alphabet)))))
        blob = _pack_codes(net.alphabet.code(net.weights), bits)
        header["weights"] = None
        header["packed"] = {"bits": bits, "count": int(len(net.weights)), "length": len(blob), "crc32": zlib.crc32(blob)}
    else:
        header["weights"] = net.weights.tolist()
        header["packed"] = None
    text = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = MAGIC + struct.pack("<I", len(text)) + text + blob
    return payload + struct.pack("<I", zlib.crc32(payload))


def deserialize_net(data: bytes) -> QuantNet:
    """Decode a ``.qnn`` container; rejects corruption, version skew and alphabet violations."""
    if len(data) < 12 or data[:4] != MAGIC:
        raise NetFormatError("not a QNN1 file (bad magic header)")
    payload, trailer = data[:-4], data[-4:]
    if struct.unpack("<I", trailer)[0] != zlib.crc32(payload):
        raise NetFormatError("CRC-32 mismatch; file is corrupted")
    (hlen,) = struct.unpack("<I", payload[4:8])
    if 8 + hlen > len(payload):
        raise NetFormatError("header length exceeds file size")
    try:
        header = json.loads(payload[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise NetFormatError(f"unreadable header: {exc}") from None
    if header.get("format_version") != FORMAT_VERSION:
        raise NetFormatError(f"unsupported format version {header.get('format_version')!r}")
    try:
        alphabet = Alphabet(header["alphabet"])
        blob = payload[8 + hlen :]
        if header.get("packed"):
            meta = header["packed"]
            if len(blob) != meta["length"] or zlib.crc32(blob) != meta["crc32"]:
                raise NetFormatError("packed weight section fails its checksum")
            codes = _unpack_codes(blob, meta["bits"], meta["count"])
            if codes.size and codes.max() >= len(alphabet):
                raise AlphabetViolation("packed weight code outside the alphabet")
            weights = np.asarray(alphabet.levels)[codes]
        else:
            if blob:
                raise NetFormatError("unexpected trailing bytes after header")
            weights = header["weights"]
        return QuantNet(
            header["input_arity"],
            alphabet,
            header["layers"],
            header["activations"],
            header["biases"],
            header["src"],
            header["dst"],
            weights,
            header["outputs"],
            header.get("metadata"),
        )
    except KeyError as exc:
        raise NetFormatError(f"header is missing field {exc}") from None


def save_net(net: QuantNet, path, packed: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_net(net, packed=packed))


def load_net(path) -> QuantNet:
    with open(path, "rb") as fh:
        return deserialize_net(fh.read())

import numpy as np
import pytest

from codeclab import (
    SourceVector,
    generate_uniform_source,
    midpoint_scalar_codec,
    nested_scalar_codec,
)
from codeclab.codecs import CodecError


@pytest.fixture(scope="module")
def source():
    return generate_uniform_source(1000, 4242)


def test_rate_is_log2_codebook_size(source):
    codec = nested_scalar_codec(3)
    sv = SourceVector(source.values[:100])
    assert codec.encode(sv, 3).bits_used == 200.0
    assert codec.encode(sv, 2).bits_used == 100.0
    assert codec.encode(sv, 1).bits_used == 0.0


def test_level1_output_constant(source):
    codec = nested_scalar_codec(3)
    recon, _ = codec.reconstruct(source, 1)
    assert np.all(recon.values == recon.values[0])


def test_fixed_quality_idempotent(source):
    for codec in (nested_scalar_codec(3), midpoint_scalar_codec(3)):
        for q in (1, 2, 3):
            once, _ = codec.reconstruct(source, q)
            twice, _ = codec.reconstruct(once, q)
            assert np.array_equal(once.values, twice.values)


def test_payload_roundtrip(source):
    codec = midpoint_scalar_codec(3)
    for q in (1, 2, 3):
        bs = codec.encode(source, q)
        recon = codec.decode(bs)
        expected, _ = codec.reconstruct(source, q)
        assert np.array_equal(recon.values, expected.values)


def test_reencode_of_chain_final_is_byte_identical(source):
    # nested ladder: re-encoding any mixed-quality chain at its minimum gives
    # the very same payload as encoding the single pass at the minimum
    codec = nested_scalar_codec(3)
    rng = np.random.default_rng(5)
    for _ in range(20):
        k = int(rng.integers(1, 6))
        seq = rng.integers(1, 4, size=k).tolist()
        q_min = min(seq)
        y = source
        for q in seq:
            y, _ = codec.reconstruct(y, q)
        single, _ = codec.reconstruct(source, q_min)
        assert codec.encode(y, q_min).payload == codec.encode(single, q_min).payload


def test_quality_out_of_ladder(source):
    with pytest.raises(CodecError):
        nested_scalar_codec(3).encode(source, 4)


def test_corrupt_header_rejected(source):
    codec = nested_scalar_codec(3)
    bs = codec.encode(source, 2)
    bs.payload = b"XX" + bs.payload[2:]
    with pytest.raises(CodecError, match="header"):
        codec.decode(bs)


def test_claims_flag():
    assert nested_scalar_codec(3).claims_strong_idempotence
    assert not midpoint_scalar_codec(3).claims_strong_idempotence

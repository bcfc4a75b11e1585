import struct
import wave

import numpy as np
import pytest


def write_pcm16_wav(path, samples, rate):
    """Write a mono 16-bit PCM WAV via the stdlib (independent of the reader)."""
    ints = np.asarray(samples)
    if ints.dtype.kind == "f":
        ints = np.clip(np.round(ints * 32768.0), -32768, 32767)
    ints = ints.astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(ints.tobytes())


def write_raw_wav(path, *, audio_format=1, channels=1, rate=16000, bits=16, payload=b"\x00\x00"):
    """Hand-assemble a RIFF/WAVE file so header fields can be made invalid."""
    block_align = channels * bits // 8
    fmt = struct.pack(
        "<HHIIHH", audio_format, channels, rate, rate * block_align, block_align, bits
    )
    body = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    blob = b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body
    path.write_bytes(blob)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

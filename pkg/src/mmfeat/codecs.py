"""Decoders for the supported media formats: binary PPM/PGM, 8-bit PNG, PCM-16 WAV.

Images decode to float32 arrays of shape (H, W, 3) holding raw 0-255 values;
audio decodes to a float32 mono waveform plus its sample rate.
"""

import struct
import zlib

import numpy as np

from . import kernels
from .errors import FormatError

_WS = b" \t\r\n\v\f"


def _ppm_tokens(buf, count):
    """Read ``count`` whitespace-separated header tokens, skipping '#' comments.

    Returns the tokens and the offset just past the single whitespace byte that
    terminates the last one.
    """
    tokens = []
    pos = 0
    n = len(buf)
    while len(tokens) < count:
        while pos < n and (buf[pos] in _WS or buf[pos] == ord("#")):
            if buf[pos] == ord("#"):
                while pos < n and buf[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and buf[pos] not in _WS and buf[pos] != ord("#"):
            pos += 1
        if start == pos:
            raise FormatError("truncated PPM header", field="header")
        tokens.append(bytes(buf[start:pos]))
    if pos >= n or buf[pos] not in _WS:
        raise FormatError("PPM header must end with one whitespace byte", field="header")
    return tokens, pos + 1


def decode_ppm(buf):
    buf = bytes(buf)
    if buf[:2] not in (b"P6", b"P5"):
        raise FormatError(f"unsupported PNM magic {buf[:2]!r}", field="magic")
    channels = 3 if buf[:2] == b"P6" else 1
    (width, height, maxval), offset = _ppm_tokens(buf[2:], 3)
    offset += 2
    try:
        width, height, maxval = int(width), int(height), int(maxval)
    except ValueError as exc:
        raise FormatError(f"non-numeric PPM header field: {exc}", field="header") from exc
    if maxval != 255:
        raise FormatError(f"maxval {maxval} unsupported, only 255", field="maxval")
    if width < 1 or height < 1:
        raise FormatError(f"bad image size {width}x{height}", field="size")
    need = width * height * channels
    data = buf[offset:offset + need]
    if len(data) < need:
        raise FormatError(f"truncated PPM payload: {len(data)} of {need} bytes", field="payload")
    img = np.frombuffer(data, dtype=np.uint8).reshape(height, width, channels)
    if channels == 1:
        img = np.repeat(img, 3, axis=2)
    return img.astype(np.float32)


_PNG_SIG = b"\x89PNG\r\n\x1a\n"
# color type -> samples per pixel
_PNG_CHANNELS = {0: 1, 2: 3, 4: 2, 6: 4}


def decode_png(buf):
    buf = bytes(buf)
    if buf[:8] != _PNG_SIG:
        raise FormatError("not a PNG file", field="magic")
    pos = 8
    ihdr = None
    idat = []
    while True:
        if pos + 8 > len(buf):
            raise FormatError("truncated PNG chunk", field="chunk")
        length, ctype = struct.unpack(">I4s", buf[pos:pos + 8])
        body = buf[pos + 8:pos + 8 + length]
        crc = buf[pos + 8 + length:pos + 12 + length]
        if len(body) != length or len(crc) != 4:
            raise FormatError(f"truncated PNG chunk {ctype!r}", field="chunk")
        if zlib.crc32(ctype + body) != struct.unpack(">I", crc)[0]:
            raise FormatError(f"CRC mismatch in PNG chunk {ctype!r}", field="crc")
        pos += 12 + length
        if ctype == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", body)
        elif ctype == b"IDAT":
            idat.append(body)
        elif ctype == b"IEND":
            break
    if ihdr is None:
        raise FormatError("PNG without IHDR", field="IHDR")
    width, height, depth, color, _, _, interlace = ihdr
    if depth != 8:
        raise FormatError(f"PNG bit depth {depth} unsupported, only 8", field="bit_depth")
    if color not in _PNG_CHANNELS:
        raise FormatError(f"PNG color type {color} unsupported", field="color_type")
    if interlace != 0:
        raise FormatError("interlaced PNG unsupported", field="interlace")
    channels = _PNG_CHANNELS[color]
    stride = width * channels
    try:
        raw = zlib.decompress(b"".join(idat))
    except zlib.error as exc:
        raise FormatError(f"corrupt PNG image data: {exc}", field="IDAT") from exc
    if len(raw) < height * (stride + 1):
        raise FormatError("truncated PNG image data", field="IDAT")
    try:
        pixels = kernels.png_unfilter(raw, height, stride, channels)
    except ValueError as exc:
        raise FormatError(str(exc), field="filter") from exc
    img = np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, channels)
    if channels <= 2:
        img = np.repeat(img[:, :, :1], 3, axis=2)
    else:
        img = img[:, :, :3]
    return img.astype(np.float32)


def decode_wav(buf):
    """Decode RIFF/WAVE PCM-16 mono or stereo. Returns (waveform, sample_rate)."""
    buf = bytes(buf)
    if len(buf) < 12 or buf[:4] != b"RIFF" or buf[8:12] != b"WAVE":
        raise FormatError("not a RIFF/WAVE file", field="magic")
    pos = 12
    fmt = None
    data = None
    while pos + 8 <= len(buf):
        cid, size = struct.unpack("<4sI", buf[pos:pos + 8])
        body = buf[pos + 8:pos + 8 + size]
        if len(body) != size:
            raise FormatError(f"truncated WAV chunk {cid!r}", field="chunk")
        if cid == b"fmt ":
            if size < 16:
                raise FormatError("short fmt chunk", field="fmt")
            fmt = struct.unpack("<HHIIHH", body[:16])
        elif cid == b"data":
            data = body
        pos += 8 + size + (size & 1)
    if fmt is None or data is None:
        raise FormatError("WAV missing fmt or data chunk", field="chunk")
    code, channels, rate, _, _, bits = fmt
    if code != 1:
        raise FormatError(f"WAV format code {code} is not PCM", field="format")
    if bits != 16:
        raise FormatError(f"WAV bit depth {bits} unsupported, only 16", field="bits")
    if channels not in (1, 2):
        raise FormatError(f"WAV with {channels} channels unsupported", field="channels")
    if rate < 1:
        raise FormatError("WAV sample rate must be positive", field="rate")
    frame = 2 * channels
    if len(data) % frame:
        raise FormatError("WAV data chunk ends mid-frame", field="data")
    samples = np.frombuffer(data, dtype="<i2").astype(np.float64).reshape(-1, channels)
    mono = samples.mean(axis=1) / 32768.0
    return mono.astype(np.float32), rate

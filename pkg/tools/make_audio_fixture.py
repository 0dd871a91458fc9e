"""Write the synthetic 'recorded music' WAV used by the scatter study.

A sustained three-note chord (A2, C#3, E3) with 5 Hz vibrato and slow
tremolo, 8 kHz mono 16-bit PCM.  Usage: python tools/make_audio_fixture.py OUT.wav [SECONDS]
"""

import sys

import numpy as np
from scipy.io import wavfile


def write_chord_wav(path, seconds=130.0, rate=8000, seed=3):
    n = int(seconds * rate)
    t = np.arange(n) / rate
    rng = np.random.default_rng(seed)
    x = np.zeros(n)
    for freq, amp in ((110.0, 1.0), (138.6, 0.7), (164.8, 0.6)):
        inst = freq * (1 + 0.01 * np.sin(2 * np.pi * 5 * t))
        tremolo = 1 + 0.3 * np.sin(2 * np.pi * 0.5 * t + freq)
        x += amp * tremolo * np.sin(2 * np.pi * np.cumsum(inst) / rate)
    x += 0.02 * rng.standard_normal(n)
    x /= np.abs(x).max()
    wavfile.write(path, rate, np.round(x * 32767).astype(np.int16))
    return path


if __name__ == "__main__":
    write_chord_wav(sys.argv[1], float(sys.argv[2]) if len(sys.argv) > 2 else 130.0)

"""The three baseline feature extractors and what distinguishes the qualities."""

import numpy as np

from glottalkit import make_preset, synthesize_vowel
from glottalkit.features import (mel_spectrogram_feature, mfcc_feature,
                                 spectrogram_feature)

fs = 16000.0

features = {}
for quality in ("breathy", "modal", "pressed"):
    wave, _ = synthesize_vowel(make_preset(quality, f0=190.0), fs=fs, seed=7)
    spec = spectrogram_feature(wave)
    mel = mel_spectrogram_feature(wave)
    mfcc = mfcc_feature(wave)
    features[quality] = mel
    print(f"{quality:>8}: spectrogram {spec.dim}-d, mel {mel.dim}-d, "
          f"mfcc {mfcc.dim}-d | mean mel level {mel.values.mean():6.1f} dB")

print("\nmel-band means by region (dB): low (0-9), mid (30-39), high (70-79)")
for quality, mel in features.items():
    v = mel.values
    print(f"  {quality:>8}: {v[:10].mean():6.1f}  {v[30:40].mean():6.1f}  "
          f"{v[70:].mean():6.1f}")

print("\nthe effort/tilt ladder separates the classes along mel dimensions;"
      "\nbreathy is soft and dark, pressed is loud and bright.")

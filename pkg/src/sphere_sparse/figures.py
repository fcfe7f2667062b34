"""Figure rendering for reports: map views and SNR curves.

Maps are drawn as equirectangular (longitude, colatitude) images, not a
Mollweide projection; the point is a quick visual check next to the
delimited data, not publication graphics.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .sampling import SphericalMap, phis, thetas

__all__ = ["save_map_png", "save_snr_curve"]


def save_map_png(smap: SphericalMap, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ph = np.degrees(phis(smap.L))
    th = np.degrees(thetas(smap.L))
    im = ax.pcolormesh(ph, th, smap.values.real, shading="nearest", cmap="viridis")
    ax.invert_yaxis()
    ax.set_xlabel("longitude [deg]")
    ax.set_ylabel("colatitude [deg]")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_snr_curve(n_m_values, mean_snrs_by_label: dict, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for label, means in mean_snrs_by_label.items():
        ax.plot(n_m_values, means, "o-", label=label)
    ax.set_xlabel(r"measurement fraction $M / L^2$")
    ax.set_ylabel("mean SNR [dB]")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)

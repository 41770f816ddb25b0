"""plot_cdf.py - plot a loss CDF curve written by creditvar.

Usage:
    creditvar cdf --example --out curve.csv
    creditvar mc-check --example --out check.csv
    python plot_cdf.py curve.csv check.csv --png cdf.png

A cdf curve (columns x, cdf) is drawn as a line. An mc-check curve (columns x, analytic_cdf,
empirical_cdf, std_error) is drawn as the analytic line with the empirical points and a
3 standard error band. Needs matplotlib (pip install creditvar[plot]).
"""
import argparse

import matplotlib.pyplot as plt
import pandas as pd


def plot_curve(axes, path):
    """Add the curve in a creditvar CSV file to the axes."""
    frame = pd.read_csv(path)
    if 'cdf' in frame.columns:
        axes.plot(frame['x'] * 100.0, frame['cdf'], label='{} (quadrature)'.format(path))
        return
    x = frame['x'] * 100.0
    axes.plot(x, frame['analytic_cdf'], label='{} (quadrature)'.format(path))
    axes.fill_between(x, frame['empirical_cdf'] - 3.0 * frame['std_error'],
                      frame['empirical_cdf'] + 3.0 * frame['std_error'], alpha=0.3)
    axes.plot(x, frame['empirical_cdf'], '.', markersize=3,
              label='{} (Monte Carlo)'.format(path))


def main():
    parser = argparse.ArgumentParser(description='Plot creditvar loss CDF curves')
    parser.add_argument('paths', nargs='+', help='CSV files written by creditvar')
    parser.add_argument('--png', default=None, help='save to this file instead of showing')
    args = parser.parse_args()

    fig, axes = plt.subplots(figsize=(8, 5))
    for path in args.paths:
        plot_curve(axes, path)
    axes.set_xlabel('Portfolio loss (% of notional)')
    axes.set_ylabel('P(loss <= x)')
    axes.grid(True, alpha=0.3)
    axes.legend()
    plt.tight_layout()

    if args.png:
        plt.savefig(args.png, dpi=150, bbox_inches='tight')
    else:
        plt.show()
    plt.close()


if __name__ == '__main__':
    main()

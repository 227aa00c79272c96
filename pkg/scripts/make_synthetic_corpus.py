#!/usr/bin/env python3
"""Write a synthetic corpus (devices.json, feed.json, notes/) for `fdsri ingest`."""
import argparse

from fdsri.synthetic import generate_corpus, write_fixtures


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True)
    ap.add_argument("--n-devices", type=int, default=60)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--pt-noise", type=float, default=0.35, help="log-scale sd of patch intervals")
    ap.add_argument("--vt-noise", type=float, default=0.8, help="sd of CVSS scores")
    args = ap.parse_args()
    corpus = generate_corpus(args.n_devices, args.seed, args.pt_noise, args.vt_noise)
    paths = write_fixtures(corpus, args.out)
    print(f"{len(corpus)} devices, {sum(len(d.cves) for d in corpus)} CVEs")
    print(f"fdsri ingest --devices {paths['devices']} --feed {paths['feed']} "
          f"--notes {paths['notes']} --workspace WS")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Regenerate the GRCh38 fixtures under data/grch38/ from the `ideogram` npm package.

Usage:
    npm pack ideogram@1.53.0
    tar xzf ideogram-1.53.0.tgz
    python3 scripts/make_fixtures.py package/dist/data data/grch38

Inputs (all inside the ideogram tarball):
  bands/native/homo-sapiens.json                    850-band GRCh38 cytobands (1-based bp)
  bands/native/homo-sapiens-GCF_000001405.40.json   GRCh38.p14 arm table, used to check lengths
  cache/genes/homo-sapiens-genes.tsv.gz             Ensembl 110 GRCh38 gene positions
  cache/gene-structures/homo-sapiens-gene-structures.tsv.gz
                                                    canonical transcripts with strand and biotype

Outputs:
  cytobands.tsv    UCSC cytoBand layout, 0-based half-open
  genes.tsv        protein-coding genes, 1-based inclusive, with header
  phenotypes.csv   three synthetic phenotypes A, B, C assigned per chromosome
"""
import gzip
import json
import random
import sys
from pathlib import Path

NUCLEAR = [str(i) for i in range(1, 23)] + ["X", "Y"]


def load_bands(data):
    rows = json.loads((data / "bands/native/homo-sapiens.json").read_text())["chrBands"]
    bands = []
    for row in rows:
        f = row.split(" ")
        chrom, arm, band = f[0], f[1], f[2]
        if chrom not in NUCLEAR:
            continue
        start1, stop = int(f[5]), int(f[6])
        stain = f[7] + f[8] if len(f) > 8 else f[7]
        bands.append((chrom, start1 - 1, stop, arm + band, stain.strip()))
    return bands


def load_lengths(data):
    rows = json.loads(
        (data / "bands/native/homo-sapiens-GCF_000001405.40.json").read_text()
    )["chrBands"]
    lengths = {}
    for row in rows:
        f = row.split(" ")
        lengths[f[0]] = max(lengths.get(f[0], 0), int(float(f[6])))
    return lengths


def load_strands(data):
    strands = {}
    path = data / "cache/gene-structures/homo-sapiens-gene-structures.tsv.gz"
    for line in gzip.open(path, "rt"):
        if line.startswith("#"):
            continue
        f = line.rstrip("\n").split("\t")
        symbol = f[0].rsplit("-", 1)[0]
        if f[2] == "0" and symbol not in strands:
            strands[symbol] = f[3]
    return strands


def load_genes(data, strands, lengths):
    seen = set()
    genes = []
    for line in gzip.open(data / "cache/genes/homo-sapiens-genes.tsv.gz", "rt"):
        if line.startswith("#"):
            continue
        f = line.rstrip("\n").split("\t")
        chrom, start, length, symbol = f[0], int(f[1]), int(f[2]), f[4]
        if chrom not in NUCLEAR or symbol not in strands:
            continue
        if (symbol, chrom) in seen:
            continue
        end = start + length
        if end > lengths[chrom]:
            continue
        seen.add((symbol, chrom))
        genes.append((chrom, start, end, strands[symbol], symbol))
    order = {c: i for i, c in enumerate(NUCLEAR)}
    genes.sort(key=lambda g: (order[g[0]], g[1], g[4]))
    return genes


def assign_phenotypes(genes, seed=38):
    rng = random.Random(seed)
    colors = {"A": "#E41A1C", "B": "#377EB8", "C": "#4DAF4A"}
    out = []
    for chrom in NUCLEAR:
        symbols = [g[4] for g in genes if g[0] == chrom]
        counts = rng.sample(range(4, 25), 3)
        picked = rng.sample(symbols, sum(counts))
        at = 0
        for name, n in zip("ABC", counts):
            for symbol in sorted(picked[at : at + n]):
                out.append((name, colors[name], symbol))
            at += n
    out.sort()
    return out


def main():
    data, dest = Path(sys.argv[1]), Path(sys.argv[2])
    dest.mkdir(parents=True, exist_ok=True)
    bands = load_bands(data)
    lengths = load_lengths(data)
    for chrom in NUCLEAR:
        end = max(b[2] for b in bands if b[0] == chrom)
        assert end == lengths[chrom], (chrom, end, lengths[chrom])
    with open(dest / "cytobands.tsv", "w", newline="\n") as fh:
        for b in bands:
            fh.write("chr%s\t%d\t%d\t%s\t%s\n" % b)
    genes = load_genes(data, load_strands(data), lengths)
    with open(dest / "genes.tsv", "w", newline="\n") as fh:
        fh.write("chrom\tstart\tend\tstrand\tsymbol\n")
        for g in genes:
            fh.write("chr%s\t%d\t%d\t%s\t%s\n" % g)
    with open(dest / "phenotypes.csv", "w", newline="\n") as fh:
        fh.write("phenotype,color,symbol\n")
        for row in assign_phenotypes(genes):
            fh.write("%s,%s,%s\n" % row)


if __name__ == "__main__":
    main()

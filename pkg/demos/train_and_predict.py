"""Drive the CLI end to end on a benchmark written to disk.

Writes PNG crops plus annotations.csv into a work directory, then calls the
same entry points the `canopylai` console script uses: extract features,
train a forest, evaluate the green/vocab matrix, and predict single crops,
comparing predictions against the known labels.
"""

import argparse
from pathlib import Path

from canopylai import parse_annotations, write_benchmark
from canopylai.cli import main as cli


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--workdir", default="demo_workspace",
                        help="where to put images, features, models, results")
    parser.add_argument("--crops", type=int, default=120)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    work = Path(args.workdir)
    annotations = write_benchmark(work / "data", n=args.crops, size=64, seed=args.seed)
    config = work / "config.toml"
    config.write_text(
        '[paths]\n'
        'annotations = "data/annotations.csv"\n'
        'image_root = "data"\n'
        'output_dir = "out"\n'
        f'[split]\nseed = {args.seed}\n'
        '[evaluate]\nextractors = ["green", "vocab"]\n',
        encoding="utf-8",
    )
    print(f"wrote {args.crops} crops and {config}\n")

    print("$ canopylai extract --config config.toml --extractor green")
    cli(["extract", "--config", str(config), "--extractor", "green"])

    print("\n$ canopylai train --config config.toml --model rf --extractor green")
    cli(["train", "--config", str(config), "--model", "rf", "--extractor", "green"])

    print("\n$ canopylai evaluate --config config.toml")
    cli(["evaluate", "--config", str(config)])

    model_file = work / "out" / "model_rf_green.laim"
    print("\n$ canopylai predict <model> <image> --bbox 0 0 64 64   (first 4 crops)")
    for record in parse_annotations(annotations)[:4]:
        image = work / "data" / record.image
        print(f"  {record.image} (label {record.lai:.3f}): ", end="")
        cli(["predict", str(model_file), str(image),
             "--bbox", str(record.x), str(record.y), str(record.w), str(record.h),
             "--config", str(config)])


if __name__ == "__main__":
    main()

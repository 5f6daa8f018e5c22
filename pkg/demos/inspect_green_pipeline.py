"""Walk one crop through every stage of the green-area extractor.

Prints what each stage does to the pixels: channel saturation, the HSV green
mask, the blurred grayscale, the Canny edge map, and the final six feature
values. Runs on a synthetic crop by default; point --image/--bbox at a real
photo to inspect field data.
"""

import argparse

import numpy as np

from canopylai import (GreenPipelineConfig, build_benchmark, canny_edges, extract_crops,
                       gaussian_blur, green_feature_names, green_mask, parse_annotations,
                       rgb_to_hsv, saturate_above, to_gray, extract_green_features)
from canopylai.dataset import AnnotationRecord, PlantCrop, load_image_rgb, clamp_bbox


def pick_crop(args) -> PlantCrop:
    if args.image is None:
        crop = build_benchmark(n=8, size=64, seed=args.seed)[args.index]
        print(f"synthetic crop {crop.crop_id} (label LAI {crop.origin.lai:.3f})")
        return crop
    x, y, w, h = args.bbox
    record = AnnotationRecord(image=args.image, x=x, y=y, w=w, h=h, lai=1.0, crop_id="demo_0000")
    pixels = load_image_rgb(args.image)
    x0, y0, x1, y1 = clamp_bbox(x, y, w, h, pixels.shape[1], pixels.shape[0])
    print(f"crop {args.image}[{y0}:{y1}, {x0}:{x1}]")
    return PlantCrop(pixels=pixels[y0:y1, x0:x1], origin=record)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--image", help="inspect a real image instead of a synthetic crop")
    parser.add_argument("--bbox", nargs=4, type=int, metavar=("X", "Y", "W", "H"),
                        default=(0, 0, 64, 64))
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--index", type=int, default=0, help="which synthetic crop (0-7)")
    args = parser.parse_args()

    crop = pick_crop(args)
    config = GreenPipelineConfig()
    h, w = crop.pixels.shape[:2]
    print(f"\n1. input: {w}x{h} RGB, channel means "
          f"{np.round(crop.pixels.reshape(-1, 3).mean(axis=0), 1).tolist()}")

    saturated = saturate_above(crop.pixels, config.binary_cutoff)
    changed = int((saturated != crop.pixels).sum())
    print(f"2. saturate values > {config.binary_cutoff} to 255: {changed} channel entries changed")

    hsv = rgb_to_hsv(saturated)
    mask = green_mask(hsv, config.hue_range, config.min_s, config.min_v)
    print(f"3. HSV mask (hue {config.hue_range[0]:.0f}-{config.hue_range[1]:.0f}, "
          f"s >= {config.min_s}, v >= {config.min_v}): {int(mask.sum())}/{mask.size} pixels green")

    masked_gray = np.where(mask, to_gray(saturated), np.uint8(0))
    blurred = gaussian_blur(masked_gray, config.edge.blur_sigma, config.edge.blur_kernel)
    print(f"4. gray + gaussian blur (sigma {config.edge.blur_sigma}, "
          f"kernel {config.edge.blur_kernel}): intensity span "
          f"{int(blurred.min())}..{int(blurred.max())}")

    edges = canny_edges(blurred, config.edge)
    print(f"5. canny ({config.edge.low_threshold:.0f}/{config.edge.high_threshold:.0f}): "
          f"{int(edges.sum())} edge pixels, {int((edges & mask).sum())} of them inside the mask")

    features = extract_green_features(crop, config)
    print("\n6. feature vector:")
    for name, value in zip(green_feature_names(), features.to_vector()):
        print(f"   {name:>20s} = {value:.6g}")


if __name__ == "__main__":
    main()

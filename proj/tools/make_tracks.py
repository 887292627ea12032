#!/usr/bin/env python3
"""Regenerates the shipped track files in tracks/.

Each file is a `track-v1` text file: a header line, then one
`x y half_width` sample per line (walls are derived by the loader from
the half-width profile unless explicit wall sections are given).
"""
import math
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "tracks")


def fmt(x: float) -> str:
    return f"{x:.9f}"


def write(name: str, closed: bool, samples, comment: str) -> None:
    path = os.path.join(OUT, name)
    with open(path, "w") as f:
        f.write(f"# {comment}\n")
        f.write(f"track-v1 closed={1 if closed else 0}\n")
        for x, y, w in samples:
            f.write(f"{fmt(x)} {fmt(y)} {fmt(w)}\n")
    n = len(samples)
    length = 0.0
    for i in range(n if closed else n - 1):
        ax, ay, _ = samples[i]
        bx, by, _ = samples[(i + 1) % n]
        length += math.hypot(bx - ax, by - ay)
    print(f"{name}: {n} samples, polygon length {length:.3f} m")


def circle(radius: float, n: int, half_width: float):
    return [
        (radius * math.cos(2 * math.pi * i / n),
         radius * math.sin(2 * math.pi * i / n),
         half_width)
        for i in range(n)
    ]


def stadium(straight: float, radius: float, half_width: float,
            arc_segments: int, straight_segments: int):
    """Counter-clockwise stadium: straights along x, semicircular ends."""
    pts = []
    # bottom straight, left to right
    for i in range(straight_segments):
        pts.append((straight * i / straight_segments, -radius, half_width))
    # right arc, -pi/2 .. pi/2 around (straight, 0)
    for i in range(arc_segments):
        a = -math.pi / 2 + math.pi * i / arc_segments
        pts.append((straight + radius * math.cos(a), radius * math.sin(a),
                    half_width))
    # top straight, right to left
    for i in range(straight_segments):
        pts.append((straight * (1 - i / straight_segments), radius,
                    half_width))
    # left arc, pi/2 .. 3pi/2 around (0, 0)
    for i in range(arc_segments):
        a = math.pi / 2 + math.pi * i / arc_segments
        pts.append((radius * math.cos(a), radius * math.sin(a), half_width))
    return pts


def corridor(length: float, n: int, half_width: float):
    return [(length * i / (n - 1), 0.0, half_width) for i in range(n)]


def main() -> None:
    os.makedirs(OUT, exist_ok=True)
    write("circle_r50.track", True, circle(50.0, 128, 4.0),
          "circular test track, radius 50 m, width 8 m")
    # 2*52.876 + 2*pi*15 = 200 m nominal
    write("oval_200.track", True, stadium(52.876, 15.0, 4.0, 24, 6),
          "200 m oval: 52.876 m straights, 15 m end radii, width 8 m")
    write("hairpin_320.track", True, stadium(140.0, 7.0, 4.0, 20, 10),
          "hairpin stadium: 140 m straights, tight 7 m end radii, width 8 m")
    write("corridor_150.track", False, corridor(150.0, 16, 5.0),
          "open straight corridor, 150 m long, width 10 m")


if __name__ == "__main__":
    main()

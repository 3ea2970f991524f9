"""Client savings grow with size: time the masked product along a ladder of shapes.

Run: python3 demos/benchmark.py   (about a minute)
"""
from cloakmat import bench_run, make_rng, rows_to_csv

rng = make_rng(5)
ladder = [(128, 160, 192), (256, 320, 384), (400, 500, 600), (512, 640, 768)]
rows = [bench_run("mmc", dims, 20, 3, rng) for dims in ladder]
print(rows_to_csv(rows), end="")
for row in rows:
    dims = "x".join(map(str, row.dims))
    print(f"{dims:>13}: client speedup i_c = {row.i_c:5.2f}, cloud overhead i_cs = {row.i_cs:4.2f}")

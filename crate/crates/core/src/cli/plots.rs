//! Matplotlib scripts written next to the data they read.

pub const TIMESERIES: &str = r#"import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("timeseries.csv")))
t = [float(r["t"]) for r in rows]
fig, ax = plt.subplots(1, 2, figsize=(10, 4))
ax[0].plot(t, [float(r["min_ux"]) for r in rows], label="min u_x")
ax[0].plot(t, [float(r["max_ux"]) for r in rows], label="max u_x")
ax[0].set_xlabel("t")
ax[0].legend()
ax[1].semilogy(t, [abs(float(r["q_drift"])) + 1e-18 for r in rows], label="|Q drift|")
ax[1].semilogy(t, [abs(float(r["e_drift"])) + 1e-18 for r in rows], label="|E drift|")
ax[1].set_xlabel("t")
ax[1].legend()
fig.tight_layout()
fig.savefig("timeseries.png", dpi=150)
"#;

pub const RATES: &str = r#"import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("rates.csv")))
t = [float(r["t"]) for r in rows]
plt.plot(t, [float(r["p_min"]) for r in rows], label="(T - t) min u_x")
plt.plot(t, [float(r["p_max"]) for r in rows], label="(T - t) max u_x")
plt.axhline(-1.0, color="k", lw=0.5)
plt.xlabel("t")
plt.legend()
plt.savefig("rates.png", dpi=150)
"#;

pub const REGION_MAP: &str = r#"import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("region_map.csv")))
fig, ax = plt.subplots(figsize=(6, 6))
for key, marker in [("charac", "s"), ("cond1", "o"), ("cond2", "x"), ("hunter", "+")]:
    pts = [(float(r["a"]), float(r["b"])) for r in rows if r[key] == "1"]
    if pts:
        ax.scatter(*zip(*pts), marker=marker, s=12, label=key)
ax.set_xlabel("a")
ax.set_ylabel("b")
ax.legend()
fig.savefig("region_map.png", dpi=150)
"#;

pub const CHARACTERISTICS: &str = r#"import csv
from collections import defaultdict
import matplotlib.pyplot as plt

curves = defaultdict(list)
for r in csv.DictReader(open("characteristics.csv")):
    curves[float(r["xi"])].append((float(r["t"]), float(r["X"])))
for pts in curves.values():
    t, x = zip(*pts)
    plt.plot(x, t, lw=0.5, color="k")
plt.xlabel("X")
plt.ylabel("t")
plt.savefig("characteristics.png", dpi=150)
"#;

pub const WAVE: &str = r#"import csv
import matplotlib.pyplot as plt

for name in ["profile.csv", "corner.csv"]:
    rows = list(csv.DictReader(open(name)))
    plt.plot([float(r["x"]) for r in rows], [float(r["phi"]) for r in rows], label=name[:-4])
plt.xlabel("x")
plt.legend()
plt.savefig("profile.png", dpi=150)
"#;

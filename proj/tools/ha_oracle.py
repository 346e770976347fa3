"""Independent historical-average check: per-road training means and test MAE.

Job JSON: {"risk_csv", "train_days", "horizon", "test_starts": [day offsets]}.
Prints {"road_means": [...], "mae": ...} for comparison against the library.
"""
import csv, json, sys

job = json.load(open(sys.argv[1]))
rows = list(csv.reader(open(job["risk_csv"])))
data = [[int(x) for x in r[1:]] for r in rows[1:]]  # one row per road
td = job["train_days"]
means = [sum(r[:td]) / td for r in data]
err = 0.0
n = 0
for s in job["test_starts"]:
    for road, m in enumerate(means):
        for d in range(s, s + job["horizon"]):
            err += abs(data[road][d] - m)
            n += 1
print(json.dumps({"road_means": means, "mae": err / n}))

import { spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { afterAll, describe, expect, it } from "vitest";

const CLI = path.join(__dirname, "..", "dist", "cli.js");

const SUMMARY =
  "policy,qi,mean_n_scheduled,mean_total_power_w,violation_prob,rmse\n" +
  ["voi", "cost_bg", "confidence_bg", "random", "bcs"]
    .flatMap((p) => [1, 2, 3].map((q) => `${p},${q},${4 - q},${300 - q},${1 / (q + 1)},${0.4 / q}`))
    .join("\n");

const FLEET =
  "fleet_size,policy,mean_n_scheduled,mean_total_power_w,violation_prob,mrmse\n" +
  ["voi", "random"]
    .flatMap((p) => [20, 40, 60].map((m) => `${m},${p},${m / 10},${m * 5},${1 / m},${10 / m}`))
    .join("\n");

const tmpDirs: string[] = [];
function tmp(): string {
  const d = fs.mkdtempSync(path.join(os.tmpdir(), "plots-test-"));
  tmpDirs.push(d);
  return d;
}
afterAll(() => {
  for (const d of tmpDirs) fs.rmSync(d, { recursive: true, force: true });
});

function plots(args: string[]) {
  return spawnSync("node", [CLI, ...args], { encoding: "utf8" });
}

describe("plots CLI", () => {
  it("renders the qi figset from summary.csv", () => {
    const dir = tmp();
    fs.writeFileSync(path.join(dir, "summary.csv"), SUMMARY);
    const out = path.join(dir, "figs");
    const res = plots(["--in", dir, "--figset", "qi", "--out", out]);
    expect(res.status).toBe(0);
    const svg = fs.readFileSync(path.join(out, "qi.svg"), "utf8");
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain("Query interval");
  });

  it("renders the fleet figset from fleet_summary.csv", () => {
    const dir = tmp();
    fs.writeFileSync(path.join(dir, "fleet_summary.csv"), FLEET);
    const out = path.join(dir, "figs");
    const res = plots(["--in", dir, "--figset", "fleet", "--out", out]);
    expect(res.status).toBe(0);
    const svg = fs.readFileSync(path.join(out, "fleet.svg"), "utf8");
    expect(svg).toContain("Fleet size");
    expect(svg).toContain("MRMSE");
  });

  it("is deterministic across invocations", () => {
    const dir = tmp();
    fs.writeFileSync(path.join(dir, "summary.csv"), SUMMARY);
    const outs = ["a", "b"].map((n) => {
      const out = path.join(dir, n);
      expect(plots(["--in", dir, "--figset", "qi", "--out", out]).status).toBe(0);
      return fs.readFileSync(path.join(out, "qi.svg"), "utf8");
    });
    expect(outs[0]).toBe(outs[1]);
  });

  it("fails loudly on a missing column", () => {
    const dir = tmp();
    fs.writeFileSync(
      path.join(dir, "summary.csv"),
      "policy,qi,mean_n_scheduled,mean_total_power_w,rmse\nvoi,1,3,200,0.2"
    );
    const res = plots(["--in", dir, "--figset", "qi", "--out", path.join(dir, "o")]);
    expect(res.status).toBe(2);
    expect(res.stderr).toContain('missing column "violation_prob"');
  });

  it("fails loudly on an empty CSV", () => {
    const dir = tmp();
    fs.writeFileSync(path.join(dir, "summary.csv"), "");
    const res = plots(["--in", dir, "--figset", "qi", "--out", path.join(dir, "o")]);
    expect(res.status).toBe(2);
    expect(res.stderr).toContain("schema error");
  });

  it("fails when the input file is absent", () => {
    const dir = tmp();
    const res = plots(["--in", dir, "--figset", "fleet", "--out", path.join(dir, "o")]);
    expect(res.status).toBe(2);
    expect(res.stderr).toContain("fleet_summary.csv");
  });

  it("names an unknown requested policy", () => {
    const dir = tmp();
    fs.writeFileSync(path.join(dir, "summary.csv"), SUMMARY);
    const res = plots([
      "--in", dir, "--figset", "qi", "--out", path.join(dir, "o"),
      "--policies", "voi,nope",
    ]);
    expect(res.status).toBe(2);
    expect(res.stderr).toContain('missing policy "nope"');
  });
});

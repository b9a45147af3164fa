import { describe, expect, it } from "vitest";

import { buildPanels, renderFigure } from "../src/figure";
import { FIGSETS, parseRows, selectPolicies } from "../src/schema";

const QI = FIGSETS.qi;

function summary(policies: string[], nQi: number): string {
  const lines = ["policy,qi,mean_n_scheduled,mean_total_power_w,violation_prob,rmse"];
  for (const p of policies) {
    for (let q = 1; q <= nQi; q++) {
      lines.push(`${p},${q},${5 - q * 0.1},${400 - q},${1 / q},${0.5 / q}`);
    }
  }
  return lines.join("\n");
}

describe("renderFigure", () => {
  it("emits one four-panel SVG with a line per policy per panel", () => {
    const rows = parseRows(summary(["voi", "confidence_bg", "bcs"], 10), QI);
    const panels = buildPanels(rows, selectPolicies(rows), QI);
    expect(panels).toHaveLength(4);
    const svg = renderFigure(panels, QI.xLabel);
    expect(svg.startsWith("<svg")).toBe(true);
    for (const label of ["VoI", "Confidence-BG", "BCS"]) {
      expect(svg).toContain(label);
    }
    for (const title of ["Scheduled sensors", "Violation probability", "RMSE"]) {
      expect(svg).toContain(title);
    }
    // Each policy keeps its fixed color in every panel.
    const voiPaths = svg.split('stroke="#d62728"').length - 1;
    expect(voiPaths).toBeGreaterThanOrEqual(4);
  });

  it("renders a single-policy single-panel figure", () => {
    const rows = parseRows(summary(["random"], 5), QI);
    const panels = buildPanels(rows, ["random"], QI).slice(0, 1);
    const svg = renderFigure(panels, QI.xLabel);
    expect(svg).toContain("Random");
    expect(svg).toContain("Scheduled sensors");
    expect(svg).not.toContain("RMSE");
  });
});

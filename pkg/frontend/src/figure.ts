/** Four-panel SVG rendering on top of echarts' server-side SVG mode. */

import * as echarts from "echarts";

import { FigsetSpec, Row, Series, seriesFor } from "./schema";

const WIDTH = 1100;
const HEIGHT = 820;

// Fixed per-policy styling so panel and legend colors never depend on
// the order policies appear in the file.
const POLICY_LABEL: Record<string, string> = {
  voi: "VoI",
  cost_bg: "Cost-BG",
  confidence_bg: "Confidence-BG",
  random: "Random",
  bcs: "BCS",
};
const POLICY_COLOR: Record<string, string> = {
  voi: "#d62728",
  cost_bg: "#1f77b4",
  confidence_bg: "#2ca02c",
  random: "#9467bd",
  bcs: "#8c564b",
};
const FALLBACK_COLORS = ["#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

function labelOf(policy: string): string {
  return POLICY_LABEL[policy] ?? policy;
}

function colorOf(policy: string, i: number): string {
  return POLICY_COLOR[policy] ?? FALLBACK_COLORS[i % FALLBACK_COLORS.length];
}

export interface Panel {
  title: string;
  series: Series[];
}

export function buildPanels(rows: Row[], policies: string[], spec: FigsetSpec): Panel[] {
  return spec.metrics.map((m) => ({
    title: m.title,
    series: seriesFor(rows, policies, m.column),
  }));
}

/** Grid rectangles (percent strings) for a 2-column panel layout. */
function gridRects(n: number) {
  const cols = Math.min(n, 2);
  const rowsN = Math.ceil(n / cols);
  const rects = [];
  for (let i = 0; i < n; i++) {
    const r = Math.floor(i / cols);
    const c = i % cols;
    rects.push({
      left: `${8 + c * (88 / cols)}%`,
      top: `${10 + r * (84 / rowsN)}%`,
      width: `${88 / cols - 8}%`,
      height: `${84 / rowsN - 10}%`,
    });
  }
  return rects;
}

export function figureOption(panels: Panel[], xLabel: string): echarts.EChartsOption {
  const rects = gridRects(panels.length);
  const titles: object[] = panels.map((p, i) => ({
    text: p.title,
    left: rects[i].left,
    top: `${parseFloat(rects[i].top) - 5}%`,
    textStyle: { fontSize: 14 },
  }));
  const series: object[] = [];
  panels.forEach((panel, gi) => {
    panel.series.forEach((s, si) => {
      series.push({
        type: "line",
        name: labelOf(s.policy),
        xAxisIndex: gi,
        yAxisIndex: gi,
        data: s.x.map((x, k) => [x, s.y[k]]),
        showSymbol: false,
        lineStyle: { width: 2 },
        color: colorOf(s.policy, si),
      });
    });
  });
  return {
    animation: false,
    title: titles,
    legend: { top: 4, left: "center" },
    grid: rects,
    xAxis: panels.map((_, i) => ({
      type: "value",
      gridIndex: i,
      name: xLabel,
      nameLocation: "middle",
      nameGap: 24,
    })),
    yAxis: panels.map((_, i) => ({ type: "value", gridIndex: i, scale: true })),
    series: series as echarts.SeriesOption[],
  };
}

export function renderFigure(panels: Panel[], xLabel: string): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: WIDTH,
    height: HEIGHT,
  });
  try {
    chart.setOption(figureOption(panels, xLabel));
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}

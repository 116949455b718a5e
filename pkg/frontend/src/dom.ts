// DOM rendering of the panel models. No domain logic lives here.

import type { AllocationModel, CurveModel, PowerModel } from "./views";
import type { CurveRow } from "./types";

const ARM_LABELS: Record<string, string> = {
  control: "Control", arm1: "Arm 1", arm2: "Arm 2",
};
const STRATEGY_LABELS: Record<string, string> = {
  one_to_one: "One-to-one", sqrt_k: "Sqrt-k", optimal: "Optimal",
};

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function setStale(panel: HTMLElement, stale: boolean): void {
  panel.classList.toggle("stale", stale);
}

export function showError(panel: HTMLElement, message: string | null): void {
  let box = panel.querySelector<HTMLElement>(".error-box");
  if (message === null) {
    box?.remove();
    return;
  }
  if (!box) {
    box = el("div", "error-box");
    panel.prepend(box);
  }
  box.textContent = message;
}

export function renderAllocation(panel: HTMLElement, model: AllocationModel): void {
  const body = panel.querySelector(".panel-body")!;
  body.textContent = "";

  const badge = el("span", `badge regime-${model.regime}`, model.regime.replace(/_/g, " "));
  const header = el("div", "badges");
  header.append(badge);
  if (model.certified) {
    header.append(el("span", "badge certified", "equal variances"));
  }
  body.append(header);

  const bars = el("div", "bars");
  for (const period of model.periods) {
    const column = el("div", "bar-column");
    const bar = el("div", "bar");
    for (const seg of period.segments) {
      const segment = el("div", `segment ${seg.arm}`);
      segment.style.height = `${(seg.share * 100).toFixed(2)}%`;
      segment.title = `${ARM_LABELS[seg.arm]}: ${seg.share.toFixed(3)}`;
      if (seg.share >= 0.12) {
        segment.textContent = seg.share.toFixed(3);
      }
      bar.append(segment);
    }
    if (period.fraction <= 0) {
      bar.classList.add("empty");
    }
    column.append(bar, el("div", "bar-label",
      `${period.label} (${(period.fraction * 100).toFixed(1)}%)`));
    bars.append(column);
  }
  body.append(bars);

  const table = el("table", "counts");
  const head = el("tr");
  head.append(el("th", "", "Strategy"), el("th", "", "Arm"),
    el("th", "", "P1"), el("th", "", "P2"), el("th", "", "P3"),
    el("th", "", "Total"));
  table.append(head);
  for (const rowset of model.table) {
    const rows: [string, number[]][] = [
      ["Control", rowset.control], ["Arm 1", rowset.arm1], ["Arm 2", rowset.arm2]];
    rows.forEach(([name, cells], i) => {
      const tr = el("tr");
      if (i === 0) {
        const th = el("td", "strategy", STRATEGY_LABELS[rowset.strategy]);
        th.setAttribute("rowspan", "3");
        tr.append(th);
      }
      tr.append(el("td", "", name));
      for (const cell of cells) {
        tr.append(el("td", "num", String(cell)));
      }
      if (i === 0) {
        const total = el("td", "num total", String(rowset.total));
        total.setAttribute("rowspan", "3");
        tr.append(total);
      }
      table.append(tr);
    });
  }
  body.append(table);
}

const WIDTH = 460;
const HEIGHT = 220;
const PAD = 34;

function svgPath(points: CurveRow[], xmax: number, ymax: number,
                 pick: (r: CurveRow) => number | null): string {
  const parts: string[] = [];
  let pen = false;
  for (const row of points) {
    const value = pick(row);
    if (value === null || Number.isNaN(value)) {
      pen = false;
      continue;
    }
    const x = PAD + (row.r2 / xmax) * (WIDTH - 2 * PAD);
    const y = HEIGHT - PAD - (value / ymax) * (HEIGHT - 2 * PAD);
    parts.push(`${pen ? "L" : "M"}${x.toFixed(1)},${y.toFixed(1)}`);
    pen = true;
  }
  return parts.join(" ");
}

export function renderCurves(panel: HTMLElement, model: CurveModel,
                             r1: number): void {
  const body = panel.querySelector(".panel-body")!;
  body.textContent = "";
  if (model.series.length === 0) {
    body.append(el("div", "placeholder", "No curve data."));
    return;
  }
  const xmax = Math.max(1e-9, 1 - r1);

  const make = (title: string, ymax: number,
                picks: { pick: (r: CurveRow) => number | null; cls: string }[],
                markers: boolean) => {
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    svg.setAttribute("class", "curve");
    for (const series of model.series) {
      for (const { pick, cls } of picks) {
        const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
        path.setAttribute("d", svgPath(series.points, xmax, ymax, pick));
        path.setAttribute("class", `line ${cls}${series.dashed ? " dashed" : ""}`);
        svg.append(path);
      }
    }
    if (markers && model.controlShareMin) {
      const x = PAD + (model.controlShareMin.r2 / xmax) * (WIDTH - 2 * PAD);
      const marker = document.createElementNS("http://www.w3.org/2000/svg", "line");
      marker.setAttribute("x1", String(x));
      marker.setAttribute("x2", String(x));
      marker.setAttribute("y1", String(PAD));
      marker.setAttribute("y2", String(HEIGHT - PAD));
      marker.setAttribute("class", "min-marker");
      svg.append(marker);
    }
    if (model.current) {
      const x = PAD + (model.current.r2 / xmax) * (WIDTH - 2 * PAD);
      const first = picks[0].pick(model.current);
      if (first !== null && !Number.isNaN(first)) {
        const dot = document.createElementNS("http://www.w3.org/2000/svg", "circle");
        dot.setAttribute("cx", String(x));
        dot.setAttribute("cy",
          String(HEIGHT - PAD - (first / ymax) * (HEIGHT - 2 * PAD)));
        dot.setAttribute("r", "4");
        dot.setAttribute("class", "current-dot");
        svg.append(dot);
      }
    }
    const box = el("div", "curve-box");
    box.append(el("div", "curve-title", title), svg);
    return box;
  };

  body.append(
    make("Period-2 allocation vs r2 (black control, red arm 1, blue arm 2; dashed = with borrowed controls)",
         1.0,
         [{ pick: (r) => (r.regime === "all_to_arm1" && r.p02 === 0 ? null : r.p02), cls: "p02" },
          { pick: (r) => r.p12, cls: "p12" },
          { pick: (r) => r.p22, cls: "p22" }],
         true),
    make("Max variance relative to two separate trials", 1.05,
         [{ pick: (r) => r.ratio_vs_separate, cls: "ratio" }], false),
  );
  const note = model.ratioBelowOneEverywhereInterior
    ? "Sharing the control beats separate trials at every interior point."
    : "";
  if (note) {
    body.append(el("div", "note", note));
  }
}

export function renderPower(panel: HTMLElement, model: PowerModel,
                            onSimulate: (strategy: string) => void): void {
  const body = panel.querySelector(".panel-body")!;
  body.textContent = "";
  if (model.entries.length === 0) {
    body.append(el("div", "placeholder", "Select at least one strategy."));
    return;
  }
  const table = el("table", "power");
  const head = el("tr");
  head.append(el("th", "", "Strategy"), el("th", "", "Power arm 1"),
    el("th", "", "Power arm 2"), el("th", "", "Source"), el("th", "", ""));
  table.append(head);
  for (const entry of model.entries) {
    const tr = el("tr");
    tr.append(el("td", "", STRATEGY_LABELS[entry.strategy]));
    const fmt = (p: number, se?: number) =>
      Number.isNaN(p) ? "n/a" : se === undefined
        ? p.toFixed(3) : `${p.toFixed(3)} ± ${se.toFixed(3)}`;
    tr.append(el("td", "num", fmt(entry.power1, entry.mcSe1)));
    tr.append(el("td", "num", fmt(entry.power2, entry.mcSe2)));
    tr.append(el("td", `source ${entry.source}`, entry.label));
    const cell = el("td");
    const button = el("button", "simulate", "simulate") as HTMLButtonElement;
    button.addEventListener("click", () => onSimulate(entry.strategy));
    cell.append(button);
    tr.append(cell);
    if (entry.warning) {
      const warn = el("tr", "warning-row");
      const td = el("td", "warning", `simulation failed: ${entry.warning}`);
      td.setAttribute("colspan", "5");
      warn.append(td);
      table.append(tr, warn);
      continue;
    }
    table.append(tr);
  }
  body.append(table);
}

/** Plain SVG bar groups.
 *
 * No charting dependency: bars are rectangles whose heights are the API
 * probabilities rounded to 3 decimals, so snapshots are deterministic and
 * every pixel is traceable to a response field.
 */

export const SCENARIO_COLORS = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
];

const BAR_AREA_HEIGHT = 120;
const LABEL_HEIGHT = 34;
const GROUP_GAP = 6;

export function round3(p: number): number {
  return Math.round(p * 1000) / 1000;
}

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface Series {
  label: string;
  color: string;
  probs: number[];
}

/** Grouped bars over one node's states; a single series is a plain chart. */
export function barGroupSvg(states: string[], series: Series[]): string {
  const barWidth = series.length > 1 ? 10 : 18;
  const groupWidth = series.length * barWidth + GROUP_GAP * 2;
  const width = states.length * groupWidth;
  const height = BAR_AREA_HEIGHT + LABEL_HEIGHT;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
      `height="${height}" viewBox="0 0 ${width} ${height}" ` +
      `class="bar-group" role="img">`,
  ];
  parts.push(
    `<line x1="0" y1="${BAR_AREA_HEIGHT}" x2="${width}" ` +
      `y2="${BAR_AREA_HEIGHT}" stroke="#888" stroke-width="1"/>`,
  );
  states.forEach((state, si) => {
    const x0 = si * groupWidth + GROUP_GAP;
    series.forEach((s, ki) => {
      const p = round3(s.probs[si] ?? 0);
      const h = p * BAR_AREA_HEIGHT;
      const x = x0 + ki * barWidth;
      const y = BAR_AREA_HEIGHT - h;
      parts.push(
        `<rect data-state="${esc(state)}" data-series="${esc(s.label)}" ` +
          `data-p="${p}" x="${x}" y="${y}" width="${barWidth - 2}" ` +
          `height="${h}" fill="${s.color}"/>`,
      );
    });
    parts.push(
      `<text x="${si * groupWidth + groupWidth / 2}" ` +
        `y="${BAR_AREA_HEIGHT + 12}" font-size="9" text-anchor="middle" ` +
        `transform="rotate(28 ${si * groupWidth + groupWidth / 2} ` +
        `${BAR_AREA_HEIGHT + 12})">${esc(state)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

/** Extract data-p bar values per series (test hook; mirrors rendering). */
export function barValues(svg: string): Record<string, number[]> {
  const out: Record<string, number[]> = {};
  const re = /data-series="([^"]*)" data-p="([^"]+)"/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(svg)) !== null) {
    const label = m[1];
    (out[label] ??= []).push(Number(m[2]));
  }
  return out;
}

export function expectedBadge(nodeName: string, minutes: number): string {
  return (
    `<span class="expected-badge" data-node="${esc(nodeName)}" ` +
    `data-minutes="${round3(minutes)}">E[${esc(nodeName)}] = ` +
    `${round3(minutes).toFixed(1)} min</span>`
  );
}

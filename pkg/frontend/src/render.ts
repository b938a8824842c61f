// Pure geometry-to-SVG rendering. The server's document is drawn as-is
// (no client-side layout), so the browser view always agrees with the
// server's own SVG export.

import type { GeometryDoc, Status } from "./api.js";

export const MARKER_COLORS: Record<string, string> = {
  friend: "blue",
  comment: "yellow",
  share: "red",
};

const STROKE = "#4a3526";
const PADDING = 20;

function num(x: number): string {
  const s = x.toFixed(3).replace(/0+$/, "").replace(/\.$/, "");
  return s === "-0" ? "0" : s;
}

function escapeText(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export function geometryToSvg(geo: GeometryDoc, markerRadius = 5): string {
  const { minX, minY, maxX, maxY } = geo.bounds;
  const width = maxX - minX + 2 * PADDING;
  const height = maxY - minY + 2 * PADDING;
  // server coordinates are y-up; flip for screen
  const sx = (x: number) => x - minX + PADDING;
  const sy = (y: number) => maxY - y + PADDING;

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${num(width)} ${num(height)}" ` +
      `width="${num(width)}" height="${num(height)}">`,
  ];
  for (const s of geo.segments) {
    parts.push(
      `<line x1="${num(sx(s.x1))}" y1="${num(sy(s.y1))}" ` +
        `x2="${num(sx(s.x2))}" y2="${num(sy(s.y2))}" ` +
        `stroke="${STROKE}" stroke-width="1.5" class="${s.kind}"/>`,
    );
  }
  for (const m of geo.markers) {
    const fill = MARKER_COLORS[m.kind] ?? "black";
    parts.push(
      `<circle cx="${num(sx(m.x))}" cy="${num(sy(m.y))}" r="${num(markerRadius)}" ` +
        `fill="${fill}" class="${m.kind}"/>`,
    );
  }
  for (const l of geo.labels) {
    parts.push(
      `<text x="${num(sx(l.x))}" y="${num(sy(l.y))}" font-size="10">` +
        `${escapeText(l.text)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

export function statusText(status: Status): string {
  return `branches: ${status.branches}  posts: ${status.posts}  friends: ${status.friends}`;
}

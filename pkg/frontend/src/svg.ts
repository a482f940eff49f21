export type Attrs = Record<string, string | number>;

function escapeText(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function attrString(attrs: Attrs): string {
  return Object.entries(attrs)
    .map(([key, value]) => ` ${key}="${escapeText(String(value))}"`)
    .join("");
}

export function element(
  tag: string,
  attrs: Attrs,
  children: string[] = [],
): string {
  if (children.length === 0) {
    return `<${tag}${attrString(attrs)}/>`;
  }
  return `<${tag}${attrString(attrs)}>${children.join("")}</${tag}>`;
}

export function text(content: string, attrs: Attrs): string {
  return `<text${attrString(attrs)}>${escapeText(content)}</text>`;
}

export function round(value: number): number {
  return Math.round(value * 100) / 100;
}

/** Polyline path, split into segments wherever a point is unplottable. */
export function segmentedPath(
  points: Array<[number, number] | null>,
): string {
  const parts: string[] = [];
  let pen = false;
  for (const point of points) {
    if (point === null) {
      pen = false;
      continue;
    }
    const [x, y] = point;
    parts.push(`${pen ? "L" : "M"}${round(x)} ${round(y)}`);
    pen = true;
  }
  return parts.join(" ");
}

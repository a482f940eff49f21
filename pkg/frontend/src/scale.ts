export type ScaleKind = "linear" | "log";

export interface Scale {
  kind: ScaleKind;
  domain: [number, number];
  range: [number, number];
  map(value: number): number;
  ticks(): number[];
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return {
    kind: "linear",
    domain,
    range,
    map: (value) => r0 + ((value - d0) / span) * (r1 - r0),
    ticks: () => linearTicks(d0, d1),
  };
}

/** Log10 scale; the domain must be strictly positive. */
export function logScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) {
    throw new Error(`log scale needs a positive domain, got [${d0}, ${d1}]`);
  }
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  const [r0, r1] = range;
  return {
    kind: "log",
    domain,
    range,
    map: (value) => r0 + ((Math.log10(value) - l0) / span) * (r1 - r0),
    ticks: () => decadeTicks(d0, d1),
  };
}

function linearTicks(lo: number, hi: number, count = 6): number[] {
  const rawStep = (hi - lo) / count || 1;
  const power = 10 ** Math.floor(Math.log10(Math.abs(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * power);
  const step =
    candidates.find((c) => c >= rawStep) ?? candidates[candidates.length - 1]!;
  const ticks: number[] = [];
  for (
    let tick = Math.ceil(lo / step) * step;
    tick <= hi + step * 1e-9;
    tick += step
  ) {
    ticks.push(Math.abs(tick) < step * 1e-9 ? 0 : tick);
  }
  return ticks;
}

function decadeTicks(lo: number, hi: number): number[] {
  const first = Math.ceil(Math.log10(lo) - 1e-9);
  const last = Math.floor(Math.log10(hi) + 1e-9);
  const stride = Math.max(1, Math.ceil((last - first) / 10));
  const ticks: number[] = [];
  for (let exp = first; exp <= last; exp += stride) {
    ticks.push(10 ** exp);
  }
  return ticks;
}

export function formatTick(value: number, kind: ScaleKind): string {
  if (value === 0) return "0";
  if (kind === "log" || Math.abs(value) >= 1e4 || Math.abs(value) < 1e-3) {
    const exp = Math.round(Math.log10(Math.abs(value)));
    if (Math.abs(value - 10 ** exp) < Math.abs(value) * 1e-9) {
      return `1e${exp}`;
    }
    return value.toExponential(1);
  }
  return `${parseFloat(value.toPrecision(6))}`;
}

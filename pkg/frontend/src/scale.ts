/** Linear and log10 axis scales with tick generation. */

export interface Scale {
  toPixel(value: number): number;
  ticks(): { value: number; label: string }[];
}

function niceTicks(lo: number, hi: number, target = 6): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / target;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const mult of [1, 2, 2.5, 5, 10]) {
    if (mag * mult >= rawStep) {
      step = mag * mult;
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * step ? 0 : v);
  }
  return ticks;
}

function fmt(v: number): string {
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(0).replace('+', '');
  return parseFloat(v.toPrecision(6)).toString();
}

export function linearScale(
  lo: number,
  hi: number,
  pixLo: number,
  pixHi: number,
): Scale {
  if (hi === lo) {
    hi = lo + (lo === 0 ? 1 : Math.abs(lo) * 0.1);
    lo = lo - (lo === 0 ? 1 : Math.abs(lo) * 0.1);
  }
  const k = (pixHi - pixLo) / (hi - lo);
  return {
    toPixel: (v) => pixLo + (v - lo) * k,
    ticks: () => niceTicks(lo, hi).map((v) => ({ value: v, label: fmt(v) })),
  };
}

export function logScale(
  lo: number,
  hi: number,
  pixLo: number,
  pixHi: number,
): Scale {
  if (lo <= 0) throw new Error('log scale needs positive values');
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi === lo ? lo * 10 : hi);
  const k = (pixHi - pixLo) / (lhi - llo);
  return {
    toPixel: (v) => pixLo + (Math.log10(v) - llo) * k,
    ticks: () => {
      const ticks: { value: number; label: string }[] = [];
      for (let e = Math.ceil(llo - 1e-9); e <= Math.floor(lhi + 1e-9); e++) {
        ticks.push({ value: Math.pow(10, e), label: `1e${e}` });
      }
      return ticks.length >= 2
        ? ticks
        : [lo, hi].map((v) => ({ value: v, label: fmt(v) }));
    },
  };
}

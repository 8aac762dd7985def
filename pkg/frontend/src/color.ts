// Perceptually uniform sequential colour scale (viridis anchors) with a
// fixed [0, 1] domain, so heatmap screenshots are comparable across wards
// regardless of the probabilities on screen.

const STOPS: [number, number, number][] = [
  [68, 1, 84],
  [70, 50, 126],
  [54, 92, 141],
  [39, 127, 142],
  [31, 161, 135],
  [74, 193, 109],
  [160, 218, 57],
  [223, 227, 24],
  [253, 231, 37],
];

function clamp01(v: number): number {
  if (Number.isNaN(v)) return 0;
  return Math.min(1, Math.max(0, v));
}

function hex(channel: number): string {
  return Math.round(channel).toString(16).padStart(2, "0");
}

/** Colour for a probability; the domain is always [0, 1], never rescaled. */
export function probabilityColor(value: number): string {
  const v = clamp01(value) * (STOPS.length - 1);
  const low = Math.floor(v);
  const high = Math.min(low + 1, STOPS.length - 1);
  const t = v - low;
  const rgb = STOPS[low].map((c, i) => c + t * (STOPS[high][i] - c));
  return `#${hex(rgb[0])}${hex(rgb[1])}${hex(rgb[2])}`;
}

/** Readable text colour on top of the cell colour. */
export function textColorFor(value: number): string {
  // The scale is dark below ~0.55 and bright yellow-green above.
  return clamp01(value) < 0.55 ? "#ffffff" : "#1a1a1a";
}

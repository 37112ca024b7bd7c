// Deterministic graph layout for one machine panel.
//
// States sit on a circle in declaration order, start state at the top,
// going clockwise. No randomness anywhere, so the same model always renders
// pixel-identically and screenshots are reproducible.

export interface Point {
  x: number;
  y: number;
}

export interface NodeLayout {
  name: string;
  x: number;
  y: number;
  r: number;
}

export interface EdgeLayout {
  src: string;
  dst: string;
  hop: string;
  /** SVG path data for the edge curve, trimmed to the node boundaries. */
  d: string;
  /** Anchor for consumed-event labels, on the outward side of the curve. */
  labelAbove: Point;
  /** Anchor for emitted labels, on the inner side of the curve. */
  labelBelow: Point;
  selfLoop: boolean;
}

export interface MachineLayout {
  width: number;
  height: number;
  nodes: NodeLayout[];
  edges: EdgeLayout[];
}

export interface LayoutInput {
  states: string[];
  edges: Array<{ src: string; dst: string; hop: string }>;
}

export interface LayoutOptions {
  width?: number;
  height?: number;
  nodeRadius?: number;
}

const DEFAULTS = { width: 280, height: 240, nodeRadius: 26 };

export function layoutMachine(machine: LayoutInput, options: LayoutOptions = {}): MachineLayout {
  const width = options.width ?? DEFAULTS.width;
  const height = options.height ?? DEFAULTS.height;
  const nodeR = options.nodeRadius ?? DEFAULTS.nodeRadius;

  const cx = width / 2;
  const cy = height / 2;
  const ringR = Math.max(0, Math.min(width, height) / 2 - nodeR - 18);

  const nodes: NodeLayout[] = machine.states.map((name, i) => {
    if (machine.states.length === 1) {
      return { name, x: cx, y: cy, r: nodeR };
    }
    const angle = -Math.PI / 2 + (2 * Math.PI * i) / machine.states.length;
    return {
      name,
      x: round2(cx + ringR * Math.cos(angle)),
      y: round2(cy + ringR * Math.sin(angle)),
      r: nodeR,
    };
  });

  const byName = new Map(nodes.map((n) => [n.name, n]));
  const edges: EdgeLayout[] = machine.edges.map((e) => {
    const src = byName.get(e.src);
    const dst = byName.get(e.dst);
    if (!src || !dst) {
      throw new Error(`edge ${e.hop} references unknown state ${!src ? e.src : e.dst}`);
    }
    return src === dst
      ? layoutSelfLoop(e, src, { x: cx, y: cy })
      : layoutArc(e, src, dst);
  });

  return { width, height, nodes, edges };
}

function layoutArc(
  e: { src: string; dst: string; hop: string },
  src: NodeLayout,
  dst: NodeLayout,
): EdgeLayout {
  const dx = dst.x - src.x;
  const dy = dst.y - src.y;
  const len = Math.hypot(dx, dy) || 1;
  const ux = dx / len;
  const uy = dy / len;
  // left-hand normal; opposite directions of the same pair bow apart
  const nx = -uy;
  const ny = ux;
  const bow = 26;

  const mid = { x: (src.x + dst.x) / 2 + nx * bow, y: (src.y + dst.y) / 2 + ny * bow };
  const p0 = boundaryPoint(src, mid);
  const p2 = boundaryPoint(dst, mid);
  const apex = bezierMid(p0, mid, p2);

  return {
    src: e.src,
    dst: e.dst,
    hop: e.hop,
    d: `M ${round2(p0.x)} ${round2(p0.y)} Q ${round2(mid.x)} ${round2(mid.y)} ${round2(p2.x)} ${round2(p2.y)}`,
    labelAbove: { x: round2(apex.x + nx * 12), y: round2(apex.y + ny * 12) },
    labelBelow: { x: round2(apex.x - nx * 12), y: round2(apex.y - ny * 12) },
    selfLoop: false,
  };
}

function layoutSelfLoop(
  e: { src: string; dst: string; hop: string },
  node: NodeLayout,
  center: Point,
): EdgeLayout {
  // loop sticks out away from the panel center
  let ox = node.x - center.x;
  let oy = node.y - center.y;
  const olen = Math.hypot(ox, oy);
  if (olen < 1) {
    ox = 0;
    oy = -1;
  } else {
    ox /= olen;
    oy /= olen;
  }
  const spread = Math.PI / 5;
  const base = Math.atan2(oy, ox);
  const a1 = base - spread;
  const a2 = base + spread;
  const p0 = { x: node.x + node.r * Math.cos(a1), y: node.y + node.r * Math.sin(a1) };
  const p2 = { x: node.x + node.r * Math.cos(a2), y: node.y + node.r * Math.sin(a2) };
  const reach = node.r * 2.4;
  const c1 = { x: node.x + reach * Math.cos(a1), y: node.y + reach * Math.sin(a1) };
  const c2 = { x: node.x + reach * Math.cos(a2), y: node.y + reach * Math.sin(a2) };
  const apex = {
    x: node.x + (node.r + reach) * 0.55 * ox,
    y: node.y + (node.r + reach) * 0.55 * oy,
  };

  return {
    src: e.src,
    dst: e.dst,
    hop: e.hop,
    d:
      `M ${round2(p0.x)} ${round2(p0.y)} ` +
      `C ${round2(c1.x)} ${round2(c1.y)} ${round2(c2.x)} ${round2(c2.y)} ` +
      `${round2(p2.x)} ${round2(p2.y)}`,
    labelAbove: { x: round2(apex.x + ox * 16), y: round2(apex.y + oy * 16) },
    labelBelow: { x: round2(apex.x - ox * 4), y: round2(apex.y - oy * 4) },
    selfLoop: true,
  };
}

function boundaryPoint(node: NodeLayout, toward: Point): Point {
  const dx = toward.x - node.x;
  const dy = toward.y - node.y;
  const len = Math.hypot(dx, dy) || 1;
  return { x: node.x + (dx / len) * node.r, y: node.y + (dy / len) * node.r };
}

function bezierMid(p0: Point, c: Point, p2: Point): Point {
  return {
    x: 0.25 * p0.x + 0.5 * c.x + 0.25 * p2.x,
    y: 0.25 * p0.y + 0.5 * c.y + 0.25 * p2.y,
  };
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}

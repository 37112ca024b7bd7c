import { describe, expect, it } from "vitest";

import { layoutMachine, type LayoutInput } from "../src/layout.js";

const TOGGLE: LayoutInput = {
  states: ["up", "down"],
  edges: [
    { src: "up", dst: "down", hop: "up_down" },
    { src: "down", dst: "up", hop: "down_up" },
  ],
};

const LIGHTS: LayoutInput = {
  states: ["green", "yellow", "red"],
  edges: [
    { src: "green", dst: "yellow", hop: "green_yellow" },
    { src: "yellow", dst: "red", hop: "yellow_red" },
    { src: "red", dst: "green", hop: "red_green" },
  ],
};

describe("layoutMachine", () => {
  it("is deterministic", () => {
    const a = layoutMachine(LIGHTS);
    const b = layoutMachine(LIGHTS);
    expect(b).toEqual(a);
    expect(JSON.stringify(b)).toBe(JSON.stringify(a));
  });

  it("puts the first state at the top of the ring", () => {
    const layout = layoutMachine(LIGHTS);
    const [first, ...rest] = layout.nodes;
    expect(first!.x).toBeCloseTo(layout.width / 2, 1);
    for (const node of rest) {
      expect(first!.y).toBeLessThan(node.y);
    }
  });

  it("keeps declaration order and distinct positions", () => {
    const layout = layoutMachine(LIGHTS);
    expect(layout.nodes.map((n) => n.name)).toEqual(["green", "yellow", "red"]);
    const keys = new Set(layout.nodes.map((n) => `${n.x},${n.y}`));
    expect(keys.size).toBe(3);
  });

  it("centers a single state", () => {
    const layout = layoutMachine({ states: ["only"], edges: [] });
    expect(layout.nodes).toHaveLength(1);
    expect(layout.nodes[0]!.x).toBe(layout.width / 2);
    expect(layout.nodes[0]!.y).toBe(layout.height / 2);
  });

  it("bows opposite directions of a pair apart", () => {
    const layout = layoutMachine(TOGGLE);
    const [ab, ba] = layout.edges;
    expect(ab!.d).not.toBe(ba!.d);
    // label anchors of the two arcs must not coincide either
    expect(ab!.labelAbove).not.toEqual(ba!.labelAbove);
  });

  it("keeps every coordinate inside the panel and finite", () => {
    const layout = layoutMachine(LIGHTS);
    for (const node of layout.nodes) {
      expect(node.x).toBeGreaterThan(0);
      expect(node.x).toBeLessThan(layout.width);
      expect(node.y).toBeGreaterThan(0);
      expect(node.y).toBeLessThan(layout.height);
    }
    for (const edge of layout.edges) {
      expect(edge.d).toMatch(/^M [\d.-]+ [\d.-]+ [QC]/);
      expect(Number.isFinite(edge.labelAbove.x)).toBe(true);
      expect(Number.isFinite(edge.labelBelow.y)).toBe(true);
    }
  });

  it("renders self loops with a distinct marker shape", () => {
    const layout = layoutMachine({
      states: ["a", "b"],
      edges: [{ src: "a", dst: "a", hop: "a_a" }],
    });
    expect(layout.edges[0]!.selfLoop).toBe(true);
    expect(layout.edges[0]!.d).toContain("C");
  });

  it("rejects edges to unknown states", () => {
    expect(() =>
      layoutMachine({ states: ["a"], edges: [{ src: "a", dst: "ghost", hop: "a_ghost" }] }),
    ).toThrow(/unknown state ghost/);
  });
});

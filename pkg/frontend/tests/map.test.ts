import { describe, expect, it } from "vitest";

import { renderMap, toScreen } from "../src/map.js";
import type { FleetSnapshot } from "../src/types.js";

function fleet(overrides: Partial<FleetSnapshot["drones"][number]>[]): FleetSnapshot {
  return {
    drones: overrides.map((o, i) => ({
      id: i + 1,
      x: 0,
      y: 0,
      z: 0,
      heading: 0,
      gimbal: 0,
      is_flying: false,
      last_command: null,
      ...o,
    })),
  };
}

describe("renderMap", () => {
  it("shows the initial fleet two meters apart vertically", () => {
    const model = renderMap(fleet([{}, { id: 2, y: 2 }]));
    expect(model.markers).toHaveLength(2);
    expect(model.markers[0]!.worldY).toBe(0);
    expect(model.markers[1]!.worldY).toBe(2);
    expect(model.markers.every((m) => m.landed)).toBe(true);
  });

  it("maps heading directly to the clockwise screen arrow (0 = up, 90 = right)", () => {
    const model = renderMap(
      fleet([
        { heading: 0, is_flying: true, z: 1 },
        { heading: 90, is_flying: true, z: 1 },
        { heading: 450, is_flying: true, z: 1 },
      ]),
    );
    expect(model.markers[0]!.arrowAngleDeg).toBe(0);
    expect(model.markers[1]!.arrowAngleDeg).toBe(90);
    expect(model.markers[2]!.arrowAngleDeg).toBe(90);
  });

  it("labels altitude and distinguishes landed drones", () => {
    const model = renderMap(fleet([{ z: 1, is_flying: true }, { z: 0 }]));
    expect(model.markers[0]!.altitudeLabel).toBe("z=1.0m");
    expect(model.markers[0]!.landed).toBe(false);
    expect(model.markers[1]!.landed).toBe(true);
  });

  it("handles a missing snapshot", () => {
    expect(renderMap(null).markers).toEqual([]);
  });
});

describe("toScreen", () => {
  it("maps +x to screen-right and +y to screen-up", () => {
    const origin = toScreen(0, 0, 400, 400, 20);
    const east = toScreen(5, 0, 400, 400, 20);
    const north = toScreen(0, 5, 400, 400, 20);
    expect(origin).toEqual({ x: 200, y: 200 });
    expect(east.x).toBeGreaterThan(origin.x);
    expect(east.y).toBe(origin.y);
    expect(north.y).toBeLessThan(origin.y);
    expect(north.x).toBe(origin.x);
  });
});

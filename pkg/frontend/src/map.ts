/** Top-down fleet map: a pure draw model from a fleet snapshot.
 *
 * World x maps to screen-right and world y to screen-up. Heading 0 points
 * screen-up and increases clockwise, so the arrow angle equals the heading.
 */

import type { FleetSnapshot } from "./types.js";

export interface MapMarker {
  id: number;
  worldX: number;
  worldY: number;
  /** Clockwise degrees with 0 pointing screen-up. */
  arrowAngleDeg: number;
  altitudeLabel: string;
  landed: boolean;
}

export interface MapModel {
  markers: MapMarker[];
}

export function renderMap(fleet: FleetSnapshot | null): MapModel {
  if (!fleet) {
    return { markers: [] };
  }
  return {
    markers: fleet.drones.map((drone) => ({
      id: drone.id,
      worldX: drone.x,
      worldY: drone.y,
      arrowAngleDeg: ((drone.heading % 360) + 360) % 360,
      altitudeLabel: `z=${drone.z.toFixed(1)}m`,
      landed: !drone.is_flying,
    })),
  };
}

export interface ScreenPoint {
  x: number;
  y: number;
}

/** World->pixel transform for a canvas whose origin is the top-left. */
export function toScreen(
  worldX: number,
  worldY: number,
  width: number,
  height: number,
  metersAcross: number,
): ScreenPoint {
  const scale = width / metersAcross;
  return {
    x: width / 2 + worldX * scale,
    y: height / 2 - worldY * scale,
  };
}

export function paintMap(
  ctx: CanvasRenderingContext2D,
  model: MapModel,
  width: number,
  height: number,
  metersAcross = 24,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#2a2f3a";
  ctx.lineWidth = 1;
  const scale = width / metersAcross;
  for (let m = -metersAcross / 2; m <= metersAcross / 2; m += 2) {
    const { x } = toScreen(m, 0, width, height, metersAcross);
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, height);
    ctx.stroke();
    const { y } = toScreen(0, m, width, height, metersAcross);
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(width, y);
    ctx.stroke();
  }
  for (const marker of model.markers) {
    const p = toScreen(marker.worldX, marker.worldY, width, height, metersAcross);
    ctx.beginPath();
    ctx.fillStyle = marker.landed ? "#8899aa" : "#4dd0e1";
    ctx.arc(p.x, p.y, 8, 0, Math.PI * 2);
    ctx.fill();

    const angle = (marker.arrowAngleDeg * Math.PI) / 180;
    const tipX = p.x + 14 * Math.sin(angle);
    const tipY = p.y - 14 * Math.cos(angle);
    ctx.beginPath();
    ctx.strokeStyle = marker.landed ? "#8899aa" : "#ffffff";
    ctx.lineWidth = 2;
    ctx.moveTo(p.x, p.y);
    ctx.lineTo(tipX, tipY);
    ctx.stroke();

    ctx.fillStyle = "#dde3ea";
    ctx.font = "11px sans-serif";
    ctx.fillText(`#${marker.id} ${marker.altitudeLabel}${marker.landed ? " (landed)" : ""}`, p.x + 10, p.y + 18);
  }
}

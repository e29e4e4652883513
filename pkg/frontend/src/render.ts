/** Orthographic projection and canvas drawing.
 *
 * Top-down is the default view (the task is tabletop); the orbit toggle
 * tilts the same orthographic camera. Projection is kept separate from
 * drawing so it can be tested without a DOM.
 */
import type { GripperPose, StateMessage, Vec3 } from "./protocol.js";
import * as quat from "./quat.js";
import type { CameraPose, ViewModel } from "./viewmodel.js";

export interface Viewport {
  width: number;
  height: number;
  /** World meters mapped to the full viewport width. */
  worldWidth: number;
  /** World-space point at the viewport center. */
  center: Vec3;
}

/** Right/up/forward unit vectors of the camera in world space. */
export function viewBasis(camera: CameraPose): { right: Vec3; up: Vec3 } {
  if (camera.topDown) {
    return { right: [1, 0, 0], up: [0, 1, 0] };
  }
  const ca = Math.cos(camera.azimuth);
  const sa = Math.sin(camera.azimuth);
  const ce = Math.cos(camera.elevation);
  const se = Math.sin(camera.elevation);
  // orbit: yaw about world z, then tilt; up keeps a +z component so the
  // table plane recedes instead of degenerating to a line
  const right: Vec3 = [ca, sa, 0];
  const up: Vec3 = [-sa * se, ca * se, ce];
  return { right, up };
}

export function projectPoint(p: Vec3, camera: CameraPose, vp: Viewport): [number, number] {
  const { right, up } = viewBasis(camera);
  const d: Vec3 = [p[0] - vp.center[0], p[1] - vp.center[1], p[2] - vp.center[2]];
  const x = d[0] * right[0] + d[1] * right[1] + d[2] * right[2];
  const y = d[0] * up[0] + d[1] * up[1] + d[2] * up[2];
  const scale = vp.width / vp.worldWidth;
  return [vp.width / 2 + x * scale, vp.height / 2 - y * scale];
}

function drawPolyline(
  ctx: CanvasRenderingContext2D,
  pts: Vec3[],
  camera: CameraPose,
  vp: Viewport,
  width: number,
  color: string,
): void {
  if (pts.length < 2) return;
  ctx.beginPath();
  const first = pts[0];
  if (!first) return;
  const [x0, y0] = projectPoint(first, camera, vp);
  ctx.moveTo(x0, y0);
  for (let i = 1; i < pts.length; i++) {
    const p = pts[i];
    if (!p) continue;
    const [x, y] = projectPoint(p, camera, vp);
    ctx.lineTo(x, y);
  }
  ctx.lineWidth = width;
  ctx.strokeStyle = color;
  ctx.lineCap = "round";
  ctx.lineJoin = "round";
  ctx.stroke();
}

function drawGripper(
  ctx: CanvasRenderingContext2D,
  pose: GripperPose,
  selected: boolean,
  camera: CameraPose,
  vp: Viewport,
): void {
  // paired jaw marks: separation tracks openness
  const jawAxis = quat.rotate(pose.quat, [1, 0, 0]);
  const halfGap = 0.008 + 0.02 * pose.open;
  const jawLen = 0.015;
  const along = quat.rotate(pose.quat, [0, 1, 0]);
  const color = selected ? "#ff9500" : "#888888";
  for (const side of [-1, 1]) {
    const cx = pose.pos[0] + jawAxis[0] * halfGap * side;
    const cy = pose.pos[1] + jawAxis[1] * halfGap * side;
    const cz = pose.pos[2] + jawAxis[2] * halfGap * side;
    const a: Vec3 = [cx - along[0] * jawLen, cy - along[1] * jawLen, cz - along[2] * jawLen];
    const b: Vec3 = [cx + along[0] * jawLen, cy + along[1] * jawLen, cz + along[2] * jawLen];
    drawPolyline(ctx, [a, b], camera, vp, 4, color);
  }
}

function drawGrid(ctx: CanvasRenderingContext2D, camera: CameraPose, vp: Viewport): void {
  ctx.save();
  const span = vp.worldWidth;
  const step = 0.1;
  const n = Math.ceil(span / step);
  for (let i = -n; i <= n; i++) {
    const k = vp.center[0] + i * step;
    drawPolyline(
      ctx,
      [
        [k, vp.center[1] - span, 0],
        [k, vp.center[1] + span, 0],
      ],
      camera,
      vp,
      1,
      "#e8e8e8",
    );
    const ky = vp.center[1] + i * step;
    drawPolyline(
      ctx,
      [
        [vp.center[0] - span, ky, 0],
        [vp.center[0] + span, ky, 0],
      ],
      camera,
      vp,
      1,
      "#e8e8e8",
    );
  }
  ctx.restore();
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  vm: ViewModel,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const state: StateMessage | null = vm.latest;
  const center: Vec3 = [0.5, 0, 0];
  const vp: Viewport = { width, height, worldWidth: 1.8, center };
  drawGrid(ctx, vm.camera, vp);
  if (state === null) return;
  // rope radius 5 mm: scale the stroke with the viewport so the tube
  // reads at roughly world size
  const tube = Math.max(2, (0.01 * width) / vp.worldWidth);
  drawPolyline(ctx, state.particles, vm.camera, vp, tube, "#2255cc");
  drawGripper(ctx, state.grippers.left, vm.selectedArm === "left", vm.camera, vp);
  drawGripper(ctx, state.grippers.right, vm.selectedArm === "right", vm.camera, vp);
}

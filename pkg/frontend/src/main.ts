/** Browser entry: wires the session to a canvas and a small control strip.
 *
 * Keys: WASD moves the selected gripper in the table plane, Q/E lowers and
 * raises it, I/J/K/L rotates, G toggles the grasp, T switches arms,
 * O toggles the orbit view (drag to orbit while enabled).
 */
import { drawScene } from "./render.js";
import { Session } from "./session.js";
import type { ViewModel } from "./viewmodel.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("view");
const ctx = canvas.getContext("2d");
if (ctx === null) throw new Error("no 2d context");

const statusEl = el<HTMLSpanElement>("status");
const armEl = el<HTMLSpanElement>("arm");
const crossingsEl = el<HTMLSpanElement>("crossings");
const framesEl = el<HTMLSpanElement>("frames");
const recordBtn = el<HTMLButtonElement>("record");
const ropeIdInput = el<HTMLInputElement>("ropeid");

const params = new URLSearchParams(window.location.search);
const port = params.get("port") ?? "8765";
const url = params.get("url") ?? `ws://${window.location.hostname || "127.0.0.1"}:${port}/ws`;

let vm: ViewModel | null = null;
const session = new Session(url, {
  onChange(next) {
    vm = next;
  },
});

window.addEventListener("keydown", (ev) => {
  if (ev.target === ropeIdInput) return; // typing a rope id, not steering
  session.dispatch({ kind: "key", code: ev.code });
  if (ev.code.startsWith("Key")) ev.preventDefault();
});

recordBtn.addEventListener("click", () => {
  if (vm === null) return;
  if (vm.recording.active) {
    session.dispatch({ kind: "record-stop" });
  } else {
    const ropeId = ropeIdInput.value.trim() || "rope0";
    session.dispatch({ kind: "record-start", ropeId });
  }
});

let dragging = false;
let lastX = 0;
let lastY = 0;
canvas.addEventListener("mousedown", (ev) => {
  dragging = true;
  lastX = ev.clientX;
  lastY = ev.clientY;
});
window.addEventListener("mouseup", () => {
  dragging = false;
});
window.addEventListener("mousemove", (ev) => {
  if (!dragging || vm === null || vm.camera.topDown) return;
  session.dispatch({
    kind: "orbit",
    dAzimuth: (ev.clientX - lastX) * 0.01,
    dElevation: (ev.clientY - lastY) * 0.01,
  });
  lastX = ev.clientX;
  lastY = ev.clientY;
});

function frame(): void {
  if (vm !== null && ctx !== null) {
    drawScene(ctx, vm, canvas.width, canvas.height);
    statusEl.textContent = vm.connection;
    statusEl.className = vm.connection;
    armEl.textContent = vm.selectedArm;
    crossingsEl.textContent = String(vm.crossings);
    framesEl.textContent = String(vm.framesSeen);
    recordBtn.textContent = vm.recording.active
      ? `stop (${vm.recording.frames} frames)`
      : "record";
  }
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);

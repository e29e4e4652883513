/** UI state and its reducer.
 *
 * The reducer is a pure function (ViewModel, UiEvent) -> {vm, send}: no
 * clocks, no randomness, no socket handles. Replaying the same event
 * history therefore reproduces the same final ViewModel, and everything
 * the UI wants to transmit comes back in `send` for the session layer to
 * put on the wire.
 */
import type {
  ArmName,
  ClientMessage,
  GripperPose,
  ServerMessage,
  StateMessage,
  Vec3,
} from "./protocol.js";
import * as quat from "./quat.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export interface ControlSteps {
  translate: number; // m per key tick
  rotate: number; // rad per key tick
}

export interface CameraPose {
  topDown: boolean;
  azimuth: number;
  elevation: number;
}

export interface ViewModel {
  connection: ConnectionStatus;
  latest: StateMessage | null; // newest state only, older frames are dropped
  framesSeen: number;
  crossings: number;
  selectedArm: ArmName;
  steps: ControlSteps;
  targets: { left: GripperPose | null; right: GripperPose | null };
  recording: { active: boolean; frames: number; ropeId: string | null };
  lastRecordingPath: string | null;
  lastError: string | null;
  camera: CameraPose;
}

export type UiEvent =
  | { kind: "socket-open" }
  | { kind: "socket-close" }
  | { kind: "server"; msg: ServerMessage }
  | { kind: "key"; code: string }
  | { kind: "record-start"; ropeId: string }
  | { kind: "record-stop" }
  | { kind: "orbit"; dAzimuth: number; dElevation: number };

export interface Step {
  vm: ViewModel;
  send: ClientMessage[];
}

export function initViewModel(steps?: Partial<ControlSteps>): ViewModel {
  const translate = steps?.translate ?? 0.01;
  const rotate = steps?.rotate ?? 0.05;
  if (!(translate > 0) || !(rotate > 0)) {
    throw new RangeError("control increments must be positive");
  }
  return {
    connection: "connecting",
    latest: null,
    framesSeen: 0,
    crossings: 0,
    selectedArm: "left",
    steps: { translate, rotate },
    targets: { left: null, right: null },
    recording: { active: false, frames: 0, ropeId: null },
    lastRecordingPath: null,
    lastError: null,
    camera: { topDown: true, azimuth: 0, elevation: Math.PI / 4 },
  };
}

const TRANSLATE_KEYS: Record<string, Vec3> = {
  KeyD: [1, 0, 0],
  KeyA: [-1, 0, 0],
  KeyW: [0, 1, 0],
  KeyS: [0, -1, 0],
  KeyE: [0, 0, 1],
  KeyQ: [0, 0, -1],
};

const ROTATE_KEYS: Record<string, { axis: Vec3; sign: 1 | -1 }> = {
  KeyJ: { axis: [0, 0, 1], sign: 1 },
  KeyL: { axis: [0, 0, 1], sign: -1 },
  KeyI: { axis: [0, 1, 0], sign: 1 },
  KeyK: { axis: [0, 1, 0], sign: -1 },
};

function cmdFor(arm: ArmName, pose: GripperPose): ClientMessage {
  return { type: "cmd", arm, pos: pose.pos, quat: pose.quat, open: pose.open };
}

function handleServer(vm: ViewModel, msg: ServerMessage): ViewModel {
  switch (msg.type) {
    case "state": {
      const targets = { ...vm.targets };
      // adopt server poses as the integration basis until local control
      // has taken over that arm
      if (targets.left === null) targets.left = msg.grippers.left;
      if (targets.right === null) targets.right = msg.grippers.right;
      return {
        ...vm,
        latest: msg,
        framesSeen: vm.framesSeen + 1,
        crossings: msg.crossings,
        targets,
      };
    }
    case "recording":
      return {
        ...vm,
        recording: {
          active: msg.active,
          frames: msg.frames,
          ropeId: msg.rope_id ?? vm.recording.ropeId,
        },
        lastRecordingPath: msg.path ?? vm.lastRecordingPath,
      };
    case "error":
      return { ...vm, lastError: `${msg.code}: ${msg.message}` };
    case "ack":
      return vm;
  }
}

function handleKey(vm: ViewModel, code: string): Step {
  if (vm.connection !== "connected") return { vm, send: [] }; // dropped
  if (code === "KeyT") {
    const selectedArm: ArmName = vm.selectedArm === "left" ? "right" : "left";
    return { vm: { ...vm, selectedArm }, send: [] };
  }
  if (code === "KeyO") {
    const camera = { ...vm.camera, topDown: !vm.camera.topDown };
    return { vm: { ...vm, camera }, send: [] };
  }

  const arm = vm.selectedArm;
  const target = vm.targets[arm];
  if (target === null) return { vm, send: [] }; // no basis yet

  let next: GripperPose | null = null;
  const t = TRANSLATE_KEYS[code];
  if (t) {
    const s = vm.steps.translate;
    next = {
      ...target,
      pos: [target.pos[0] + t[0] * s, target.pos[1] + t[1] * s, target.pos[2] + t[2] * s],
    };
  }
  const r = ROTATE_KEYS[code];
  if (r) {
    const dq = quat.fromAxisAngle(r.axis, r.sign * vm.steps.rotate);
    next = { ...target, quat: quat.normalize(quat.multiply(dq, target.quat)) };
  }
  if (code === "KeyG") {
    next = { ...target, open: target.open > 0.5 ? 0.0 : 1.0 };
  }
  if (next === null) return { vm, send: [] };

  const targets = { ...vm.targets, [arm]: next };
  return { vm: { ...vm, targets }, send: [cmdFor(arm, next)] };
}

export function reduce(vm: ViewModel, event: UiEvent): Step {
  switch (event.kind) {
    case "socket-open":
      return { vm: { ...vm, connection: "connected" }, send: [] };
    case "socket-close":
      return { vm: { ...vm, connection: "disconnected" }, send: [] };
    case "server":
      return { vm: handleServer(vm, event.msg), send: [] };
    case "key":
      return handleKey(vm, event.code);
    case "record-start": {
      if (vm.connection !== "connected" || vm.recording.active) {
        return { vm, send: [] };
      }
      return { vm, send: [{ type: "record_start", rope_id: event.ropeId }] };
    }
    case "record-stop": {
      if (vm.connection !== "connected" || !vm.recording.active) {
        return { vm, send: [] }; // stop without start: disabled
      }
      return { vm, send: [{ type: "record_stop" }] };
    }
    case "orbit": {
      const camera = {
        topDown: false,
        azimuth: vm.camera.azimuth + event.dAzimuth,
        elevation: Math.min(
          Math.PI / 2 - 0.01,
          Math.max(0.05, vm.camera.elevation + event.dElevation),
        ),
      };
      return { vm: { ...vm, camera }, send: [] };
    }
  }
}

/** Fold a whole event history; used by tests for the purity property. */
export function replayEvents(events: UiEvent[], steps?: Partial<ControlSteps>): Step {
  let vm = initViewModel(steps);
  const send: ClientMessage[] = [];
  for (const e of events) {
    const step = reduce(vm, e);
    vm = step.vm;
    send.push(...step.send);
  }
  return { vm, send };
}

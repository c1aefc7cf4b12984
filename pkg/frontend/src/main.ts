/**
 * Entry point: builds the toolbar and the three views (V1 front canvas, V2
 * side canvas, V3D preview) and wires them to one Workspace over the local
 * session service.
 */

import { SessionClient } from "./api";
import { ViewCanvas, type Tool } from "./canvas";
import { bindKeyboard } from "./keyboard";
import type { Label, ProjectDoc } from "./types";
import { MeshViewer } from "./viewer3d";
import { Workspace, type RenderMode, type ViewMode } from "./workspace";

const SERVICE_URL =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8873";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  text?: string,
  cls?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (text) node.textContent = text;
  if (cls) node.className = cls;
  return node;
}

function toast(message: string): void {
  const box = document.getElementById("toast");
  if (!box) return;
  box.textContent = message;
  box.classList.add("show");
  setTimeout(() => box.classList.remove("show"), 3500);
}

async function boot(): Promise<void> {
  const client = new SessionClient(SERVICE_URL);
  await client.create();

  const viewerBox = document.getElementById("v3d") as HTMLElement;
  const viewer = new MeshViewer(viewerBox);
  const workspace = new Workspace(client, {
    error: toast,
    meshChanged: async (partId) => {
      const scene = await client.getScene();
      const doc = scene.parts.find((p) => p.id === partId);
      if (doc) viewer.setPart(doc);
    },
    strokesChanged: () => {
      canvasFront.render();
      canvasSide.render();
    },
  });

  const canvasFront = new ViewCanvas(
    "front",
    document.getElementById("v1") as HTMLCanvasElement,
    workspace,
  );
  const canvasSide = new ViewCanvas(
    "side",
    document.getElementById("v2") as HTMLCanvasElement,
    workspace,
  );

  // ------------------------------------------------------------- toolbar
  const bar = document.getElementById("toolbar") as HTMLElement;

  const addGroup = (title: string): HTMLElement => {
    const g = el("div", undefined, "group");
    g.appendChild(el("span", title, "title"));
    bar.appendChild(g);
    return g;
  };

  const annotation = addGroup("annotation");
  for (const [label, caption] of [
    ["alignment", "align"],
    ["addition", "boundary (B)"],
    ["erosion", "erosion (E)"],
  ] as [Label, string][]) {
    const b = el("button", caption);
    b.onclick = () => (workspace.label = label);
    annotation.appendChild(b);
  }
  for (const tool of ["draw", "edit", "erase"] as Tool[]) {
    const b = el("button", tool);
    b.onclick = () => {
      canvasFront.tool = tool;
      canvasSide.tool = tool;
    };
    annotation.appendChild(b);
  }

  const views = addGroup("view");
  for (const mode of ["V1", "V2", "V3D"] as ViewMode[]) {
    const b = el("button", mode);
    b.onclick = () => {
      workspace.viewMode = mode;
      document.getElementById("v1-wrap")!.style.display =
        mode === "V1" ? "" : "none";
      document.getElementById("v2-wrap")!.style.display =
        mode === "V2" ? "" : "none";
      viewerBox.style.display = mode === "V3D" ? "" : "none";
    };
    views.appendChild(b);
  }
  const selOnly = el("button", "selected only");
  selOnly.onclick = () => {
    workspace.selectedOnly = !workspace.selectedOnly;
    workspace.events.strokesChanged?.();
  };
  views.appendChild(selOnly);

  const rendering = addGroup("rendering");
  for (const mode of ["segments", "curve", "cylinder"] as RenderMode[]) {
    const b = el("button", mode);
    b.onclick = () => {
      workspace.renderMode = mode;
      if (mode === "cylinder" && workspace.selected) {
        const pair = workspace.pairs.get(workspace.selected);
        if (pair) void workspace.reconstruct(pair.part);
      }
      workspace.events.strokesChanged?.();
    };
    rendering.appendChild(b);
  }
  const wire = el("button", "wireframe");
  wire.onclick = () => viewer.setWireframe(!viewer.wireframe);
  rendering.appendChild(wire);

  const other = addGroup("other");
  const relocate = el("button", "relocate V1<->V2");
  relocate.onclick = () => {
    if (workspace.selected) void workspace.relocate(workspace.selected);
  };
  other.appendChild(relocate);
  const lock = el("button", "lock: on");
  lock.onclick = () => {
    void workspace.setLock(!workspace.lock);
    lock.textContent = `lock: ${workspace.lock ? "on" : "off"}`;
  };
  other.appendChild(lock);
  const rebuild = el("button", "rebuild");
  rebuild.onclick = () => {
    const parts = new Set(
      [...workspace.pairs.values()].map((pair) => pair.part),
    );
    for (const part of parts) void workspace.reconstruct(part);
  };
  other.appendChild(rebuild);
  const exportObj = el("button", "export OBJ");
  exportObj.onclick = async () => {
    const text = await client.sceneObjText();
    const blob = new Blob([text], { type: "text/plain" });
    const a = el("a");
    a.href = URL.createObjectURL(blob);
    a.download = "scene.obj";
    a.click();
  };
  other.appendChild(exportObj);

  // ------------------------------------------------------------ keyboard
  bindKeyboard(workspace, document);
  document.addEventListener("keydown", (ev) => {
    if (ev.key === "s" || ev.key === "S") {
      void workspace.saveProject().then((doc) => {
        const blob = new Blob([JSON.stringify(doc)], { type: "application/json" });
        const a = el("a");
        a.href = URL.createObjectURL(blob);
        a.download = "project.json";
        a.click();
      });
    } else if (ev.key === "l" || ev.key === "L") {
      const input = el("input");
      input.type = "file";
      input.onchange = async () => {
        const file = input.files?.[0];
        if (!file) return;
        const doc = JSON.parse(await file.text()) as ProjectDoc;
        await workspace.loadProject(doc);
      };
      input.click();
    }
  });

  // image upload inputs
  for (const view of ["front", "side"] as const) {
    const input = document.getElementById(`${view}-file`) as HTMLInputElement;
    input.onchange = async () => {
      const file = input.files?.[0];
      if (!file) return;
      const b64 = btoa(
        String.fromCharCode(...new Uint8Array(await file.arrayBuffer())),
      );
      const pending = (boot as unknown as { images: Record<string, string> });
      pending.images = pending.images ?? {};
      pending.images[view] = b64;
      if (pending.images.front && pending.images.side) {
        await client.uploadImages(
          { png_base64: pending.images.front },
          { png_base64: pending.images.side },
        );
        const canvas = view === "front" ? canvasFront : canvasSide;
        canvasFront.setImage(`data:image/png;base64,${pending.images.front}`);
        canvasSide.setImage(`data:image/png;base64,${pending.images.side}`);
        void canvas;
        toast("images uploaded");
      }
    };
  }
}

void boot().catch((err) => toast(`cannot reach service: ${err}`));

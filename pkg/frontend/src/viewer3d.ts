/**
 * 3D preview (V3D): one shaded mesh per reconstructed part, orbit/zoom,
 * wireframe toggle.  The scene graph works headlessly; the WebGL renderer
 * and controls attach only when a canvas with a GL context is available, so
 * render failures can never block 2D editing.
 */

import * as THREE from "three";
import type { MeshDoc } from "./types";

export class MeshViewer {
  readonly scene = new THREE.Scene();
  readonly parts = new Map<string, THREE.Mesh>();
  wireframe = false;

  private renderer: THREE.WebGLRenderer | null = null;
  private camera: THREE.PerspectiveCamera;
  private controls: { update: () => void } | null = null;

  constructor(container?: HTMLElement) {
    this.camera = new THREE.PerspectiveCamera(40, 4 / 3, 0.1, 5000);
    this.camera.position.set(250, 150, 350);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.45));
    const key = new THREE.DirectionalLight(0xffffff, 1.0);
    key.position.set(1, 2, 1.5);
    this.scene.add(key);
    if (container) {
      void this.attach(container);
    }
  }

  private async attach(container: HTMLElement): Promise<void> {
    let renderer: THREE.WebGLRenderer;
    try {
      renderer = new THREE.WebGLRenderer({ antialias: true });
    } catch {
      return; // headless or WebGL-less environment: scene graph only
    }
    this.renderer = renderer;
    const w = container.clientWidth || 640;
    const h = container.clientHeight || 480;
    renderer.setSize(w, h);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
    container.appendChild(renderer.domElement);
    const { OrbitControls } = await import(
      "three/examples/jsm/controls/OrbitControls.js"
    );
    this.controls = new OrbitControls(this.camera, renderer.domElement);
    renderer.setAnimationLoop(() => {
      this.controls?.update();
      renderer.render(this.scene, this.camera);
    });
  }

  /** Insert or replace the mesh for one part; others are untouched. */
  setPart(doc: MeshDoc): void {
    this.removePart(doc.id);
    const geometry = new THREE.BufferGeometry();
    const positions = new Float32Array(doc.vertices.length * 3);
    doc.vertices.forEach((v, i) => {
      positions[3 * i] = v[0];
      positions[3 * i + 1] = v[1];
      positions[3 * i + 2] = v[2];
    });
    const index = new Uint32Array(doc.triangles.length * 3);
    doc.triangles.forEach((t, i) => {
      index[3 * i] = t[0];
      index[3 * i + 1] = t[1];
      index[3 * i + 2] = t[2];
    });
    geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
    geometry.setIndex(new THREE.BufferAttribute(index, 1));
    geometry.computeVertexNormals();
    const material = new THREE.MeshStandardMaterial({
      color: 0x8fb4d9,
      roughness: 0.8,
      wireframe: this.wireframe,
    });
    const mesh = new THREE.Mesh(geometry, material);
    mesh.name = doc.id;
    this.parts.set(doc.id, mesh);
    this.scene.add(mesh);
  }

  removePart(id: string): void {
    const old = this.parts.get(id);
    if (old) {
      this.scene.remove(old);
      old.geometry.dispose();
      this.parts.delete(id);
    }
  }

  setWireframe(on: boolean): void {
    this.wireframe = on;
    for (const mesh of this.parts.values()) {
      (mesh.material as THREE.MeshStandardMaterial).wireframe = on;
    }
  }

  get partCount(): number {
    return this.parts.size;
  }

  dispose(): void {
    this.renderer?.setAnimationLoop(null);
    this.renderer?.dispose();
    this.renderer = null;
    this.controls = null;
  }

  vertexCount(id: string): number {
    const mesh = this.parts.get(id);
    if (!mesh) return 0;
    return mesh.geometry.getAttribute("position").count;
  }
}

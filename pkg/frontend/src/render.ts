/**
 * Thin three.js layer: turn an /api/mesh payload into a renderable
 * geometry.  All numbers come from the service; no physics here.
 */

import * as THREE from 'three';

import type { MeshPayload } from './types';

export function buildWingGeometry(payload: MeshPayload): THREE.BufferGeometry {
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute(
    'position',
    new THREE.Float32BufferAttribute(payload.vertices, 3),
  );
  geometry.setIndex(payload.triangles);
  geometry.computeVertexNormals();
  return geometry;
}

export interface WingViewport {
  render(payload: MeshPayload): void;
  dispose(): void;
}

export function createWingViewport(canvas: HTMLCanvasElement): WingViewport {
  const renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0x111827);
  const camera = new THREE.PerspectiveCamera(
    45,
    canvas.clientWidth / Math.max(1, canvas.clientHeight),
    0.01,
    100,
  );
  camera.position.set(1.6, -2.2, 1.4);
  camera.up.set(0, 0, 1);
  camera.lookAt(0.4, 0.6, 0);
  scene.add(new THREE.AmbientLight(0xffffff, 0.45));
  const sun = new THREE.DirectionalLight(0xffffff, 1.0);
  sun.position.set(2, -3, 4);
  scene.add(sun);

  let mesh: THREE.Mesh | null = null;
  const material = new THREE.MeshStandardMaterial({
    color: 0x60a5fa,
    metalness: 0.1,
    roughness: 0.6,
    side: THREE.DoubleSide,
  });

  return {
    render(payload: MeshPayload) {
      if (mesh) {
        scene.remove(mesh);
        mesh.geometry.dispose();
      }
      mesh = new THREE.Mesh(buildWingGeometry(payload), material);
      scene.add(mesh);
      renderer.render(scene, camera);
    },
    dispose() {
      if (mesh) {
        scene.remove(mesh);
        mesh.geometry.dispose();
      }
      material.dispose();
      renderer.dispose();
    },
  };
}

import type { Workspace } from "./workspace";

/**
 * Editing shortcuts: Z undo, Enter finish stroke, B/E label switches.
 * Returns an unbind function.
 */
export function bindKeyboard(workspace: Workspace, doc: Document): () => void {
  const handler = (ev: KeyboardEvent): void => {
    const key = ev.key.toLowerCase();
    if (key === "z") {
      void workspace.undoLast();
    } else if (key === "enter") {
      void workspace.finishStroke();
    } else if (key === "b") {
      workspace.label = "addition";
    } else if (key === "e") {
      workspace.label = "erosion";
    }
  };
  doc.addEventListener("keydown", handler);
  return () => doc.removeEventListener("keydown", handler);
}

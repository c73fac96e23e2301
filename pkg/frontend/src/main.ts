import { initApp } from "./app.js";

declare global {
  interface Window {
    ICDH_API_BASE?: string;
  }
}

const base = window.ICDH_API_BASE ?? "http://127.0.0.1:8008";
initApp(document.getElementById("app")!, base);

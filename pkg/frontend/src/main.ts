import { ApiClient } from "./api.js";
import { CurationApp } from "./app.js";

function baseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "http://127.0.0.1:8000";
}

const root = document.getElementById("app");
if (root) {
  const curator = new URLSearchParams(window.location.search).get("curator") ?? "curator";
  const app = new CurationApp(new ApiClient(baseUrl()), curator);
  void app.mount(root);
}
